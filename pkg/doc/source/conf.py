# -*- coding: utf-8 -*-
#
# python-compada documentation build configuration file.
#
# This file is execfile()d with the current directory set to its containing dir.

import os
import sys

sys.path.insert(0, os.path.abspath('../..'))

from compada.version import VERSION, get_version  # noqa: E402

# -- General configuration ------------------------------------------------

extensions = ['sphinx.ext.autodoc']
templates_path = ['_templates']
source_suffix = '.rst'
master_doc = 'index'

project = 'python-compada'
copyright = '2021, python-compada authors'

# The short X.Y version.
version = '%s.%s' % VERSION[:2]
# The full version, including alpha/beta/rc tags.
release = get_version()

exclude_patterns = []
pygments_style = 'sphinx'

# -- Options for HTML output ----------------------------------------------

html_theme = 'default'
html_static_path = []
htmlhelp_basename = 'python-compadadoc'
