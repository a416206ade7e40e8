# -*- coding: utf-8 -*-
#
# spdelab documentation build configuration file.

import os
import sys

sys.path.insert(0, os.path.abspath('.'))
sys.path.insert(0, "../")
from spdelab import __version__

import sphinx_rtd_theme

# -- Project information -----------------------------------------------------

project = 'spdelab'
copyright = '2026, spdelab developers'
author = 'spdelab developers'
release = __version__
version = __version__

# -- General configuration ---------------------------------------------------

extensions = [
    'sphinx.ext.autodoc',
    'sphinx.ext.autosummary',
    'sphinx.ext.doctest',
    'sphinx.ext.intersphinx',
    'sphinx.ext.viewcode',
    'sphinx.ext.imgmath',
    'numpydoc',
    'sphinx_copybutton',
]

# this is needed for some reason...
# see https://github.com/numpy/numpydoc/issues/69
numpydoc_show_class_members = False

autodoc_default_options = {'members': None, 'inherited-members': None}
templates_path = ['_templates']
autosummary_generate = True
source_suffix = '.rst'
master_doc = 'index'
exclude_patterns = ['_build', '_templates', 'Thumbs.db', '.DS_Store']
pygments_style = 'sphinx'

# -- Options for HTML output -------------------------------------------------

html_theme = 'sphinx_rtd_theme'
html_theme_path = [sphinx_rtd_theme.get_html_theme_path()]
html_static_path = []
htmlhelp_basename = 'spdelabdoc'

intersphinx_mapping = {
    'python': ('https://docs.python.org/{.major}'.format(sys.version_info), None),
    'numpy': ('https://numpy.org/doc/stable/', None),
    'scipy': ('https://docs.scipy.org/doc/scipy/', None),
    'sklearn': ('https://scikit-learn.org/stable', None),
}
