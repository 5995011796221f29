import os

from setuptools import setup, find_packages

DESCRIPTION = "Sketched full-matrix AdaGrad with composite (l1 / l2) updates, plus an experiment harness"

LONG_DESCRIPTION = None
try:
    LONG_DESCRIPTION = open('README.md').read()
except Exception as e:
    print(e)

here = os.path.abspath(os.path.dirname(__file__))
NAME = 'python-compada'
# Load the package's version.py module as a dictionary.
VERSION = ''
about = {}
if not VERSION:
    with open(os.path.join(here, "compada", 'version.py')) as f:
        exec(f.read(), about)
else:
    about['__version__'] = VERSION

CLASSIFIERS = [
    'Development Status :: 3 - Alpha',  # https://pypi.org/classifiers/
    'Intended Audience :: Science/Research',
    'License :: OSI Approved :: MIT License',
    'Operating System :: OS Independent',
    'Programming Language :: Python',
    'Topic :: Scientific/Engineering :: Mathematics',
    'Topic :: Software Development :: Libraries :: Python Modules',
]

REQUIRES = ['numpy>=1.20', 'scipy>=1.6', 'requests', 'joblib>=1.0']

setup(name=NAME,
      version=about['__version__'],
      packages=find_packages(exclude=['test']),
      author='python-compada authors',
      license='MIT',
      include_package_data=True,
      description=DESCRIPTION,
      long_description=LONG_DESCRIPTION,
      long_description_content_type="text/markdown",
      platforms=['any'],
      classifiers=CLASSIFIERS,
      python_requires='>=3.7',
      install_requires=REQUIRES,
      entry_points={'console_scripts': ['compada=compada.harness:main']},
      setup_requires=['pytest-runner'],
      tests_require=['pytest'],
      )
