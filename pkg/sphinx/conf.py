import os
import sys

# -- Package Path for Autodoc ------------------------------------------------
sys.path.insert(0, os.path.abspath(".."))

import cvplan

# -- Project Information -----------------------------------------------------
project = "cv-plan"
author = "cv-plan developers"
copyright = f"{author}, 2024"
version = cvplan.__version__
release = version

rst_prolog = f"""
.. |copyright| replace:: {copyright}
.. |author| replace:: {author}
"""

# -- General Configuration ---------------------------------------------------
extensions = [
    "sphinx.ext.autodoc",
    "sphinx.ext.doctest",
    "sphinx.ext.napoleon",
    "sphinx.ext.intersphinx",
    "sphinx.ext.mathjax",
]

templates_path = ["_templates"]
exclude_patterns = ["_build", "Thumbs.db", ".DS_Store"]

autodoc_member_order = "bysource"
napoleon_numpy_docstring = True
add_module_names = False
html_show_sourcelink = False
html_copy_source = False
python_display_short_literal_types = True

intersphinx_mapping = {
    "python": ("https://docs.python.org/3.8", None),
    "numpy": ("https://numpy.org/doc/stable", None),
    "scipy": ("https://docs.scipy.org/doc/scipy", None),
    "pandas": ("https://pandas.pydata.org/docs", None),
}

# -- Doctests ----------------------------------------------------------------
import doctest

doctest_default_flags = doctest.ELLIPSIS | doctest.NORMALIZE_WHITESPACE

# -- Furo Theme Setup --------------------------------------------------------
html_theme = "furo"

pygments_style = "solarized-light"
pygments_dark_style = "github-dark"

# -- Type Aliases ------------------------------------------------------------
autodoc_type_aliases = {
    "DataGenerator": "cvplan.montecarlo.engine.DataGenerator",
    "Rule": "cvplan.montecarlo.engine.Rule",
    "Result": "cvplan.printer.Result",
    "Source": "cvplan.converter.Source",
}
