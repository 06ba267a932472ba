"""Sphinx configuration for mopkit documentation."""

from __future__ import annotations

import sys
from pathlib import Path

# Add source directory to path for autodoc
sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

# -- Project information -----------------------------------------------------
project = "mopkit"
copyright = "2025, JacobCoffee"
author = "JacobCoffee"
release = "0.1.0"
version = "0.1.0"

# -- General configuration ---------------------------------------------------
extensions = [
    "sphinx.ext.autodoc",
    "sphinx.ext.intersphinx",
    "sphinx.ext.mathjax",
    "sphinx.ext.napoleon",
    "sphinx.ext.viewcode",
    "sphinx_copybutton",
    "sphinx_design",
]

exclude_patterns = ["_build", "Thumbs.db", ".DS_Store"]

# -- Options for HTML output -------------------------------------------------
html_theme = "shibuya"

html_theme_options = {
    "accent_color": "indigo",
    "github_url": "https://github.com/JacobCoffee/mopkit",
    "nav_links": [
        {"title": "Getting Started", "url": "getting-started/index"},
        {"title": "Configuration", "url": "configuration"},
        {"title": "API Reference", "url": "api/index"},
    ],
}

html_context = {
    "source_type": "github",
    "source_user": "JacobCoffee",
    "source_repo": "mopkit",
}

# -- Extension configuration -------------------------------------------------

# Napoleon settings
napoleon_google_docstring = True
napoleon_numpy_docstring = False
napoleon_include_init_with_doc = True
napoleon_use_param = True
napoleon_use_rtype = True

# Autodoc settings
autodoc_default_options = {
    "members": True,
    "member-order": "bysource",
    "undoc-members": True,
    "exclude-members": "__weakref__",
}
autodoc_typehints = "description"
autodoc_typehints_description_target = "documented"
autodoc_class_signature = "separated"

intersphinx_mapping = {
    "python": ("https://docs.python.org/3", None),
    "mpmath": ("https://mpmath.org/doc/current/", None),
    "sympy": ("https://docs.sympy.org/latest/", None),
    "pydantic": ("https://docs.pydantic.dev/latest/", None),
}
