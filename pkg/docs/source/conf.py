#!/usr/bin/env python3
# -*- coding: utf-8 -*-
#
# wellcast documentation build configuration file.

import os
import sys
sys.path.insert(0, os.path.abspath('../..'))

import wellcast


extensions = [
    'sphinx.ext.autodoc',
    'sphinx.ext.viewcode',
    'sphinx.ext.napoleon',
]

templates_path = ['_templates']
source_suffix = '.rst'
master_doc = 'index'

project = 'wellcast'
copyright = '2024, the wellcast developers'
author = 'the wellcast developers'

version = wellcast.__version__
release = wellcast.__version__

exclude_patterns = []
pygments_style = 'sphinx'

html_theme = 'sphinx_rtd_theme'
htmlhelp_basename = 'wellcastdoc'

man_pages = [
    (master_doc, 'wellcast', 'wellcast Documentation',
     [author], 1)
]
