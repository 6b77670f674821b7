from setuptools import setup

# Editable installs on older pip/setuptools still look for setup.py.
# Metadata, entry points and package data are declared in pyproject.toml.
setup()
