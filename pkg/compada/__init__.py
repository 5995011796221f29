from .version import VERSION, __version__

__author__ = 'python-compada authors'
