# -*- coding: utf-8 -*-
#
# torsionfield documentation build configuration file
#
import os
import sys

sys.path.insert(0, os.path.abspath('..'))

extensions = [
    'sphinx.ext.autodoc',
    'sphinx.ext.mathjax',
    'sphinx.ext.viewcode',
]

templates_path = ['_templates']
source_suffix = '.rst'
master_doc = 'index'

project = u'torsionfield'
copyright = u'2026, torsionfield authors'

import torsionfield
version = torsionfield.__version__
release = torsionfield.__version__

exclude_patterns = ['_build']
pygments_style = 'sphinx'
autodoc_member_order = 'bysource'

import sphinx_rtd_theme
html_theme = 'sphinx_rtd_theme'
html_theme_path = [sphinx_rtd_theme.get_html_theme_path()]
html_last_updated_fmt = '%b %d, %Y'
htmlhelp_basename = 'torsionfielddoc'

latex_documents = [
  ('index', 'torsionfield.tex', u'torsionfield Documentation',
   u'torsionfield authors', 'manual'),
]

man_pages = [
    ('index', 'torsionfield', u'torsionfield Documentation',
     [u'torsionfield authors'], 1)
]
