from setuptools import find_packages, setup
import codecs
from spdelab._version import __version__

DISTNAME = 'pyspdelab'
DESCRIPTION = 'Monte Carlo laboratory for moment, tail and transportation inequalities of the stochastic heat equation.'
with codecs.open('README.rst', encoding='utf-8-sig') as f:
    LONG_DESCRIPTION = f.read()
AUTHORS = 'spdelab developers'
LICENSE = 'LICENSE.txt'
VERSION = __version__
INSTALL_REQUIRES = ['setuptools', 'numpy', 'scipy', 'scikit-learn', 'joblib', 'cvxpy']
KEYWORDS = ['stochastic partial differential equations', 'monte carlo', 'heat kernel', 'concentration of measure']
CLASSIFIERS = ['Programming Language :: Python :: 3',
               'License :: OSI Approved :: MIT License',
               'Operating System :: OS Independent',
               'Intended Audience :: Science/Research',
               'Intended Audience :: Developers',
               'Topic :: Scientific/Engineering :: Mathematics']
EXTRAS_REQUIRE = {
    'tests': [
        'pytest',
        'pytest-cov'],
    'docs': [
        'sphinx',
        'sphinx_rtd_theme',
        'numpydoc',
        'sphinx_copybutton',
        'matplotlib'
    ]
}

setup(
    name=DISTNAME,
    version=VERSION,
    author=AUTHORS,
    maintainer=AUTHORS,
    license=LICENSE,
    packages=find_packages(),
    keywords=KEYWORDS,
    description=DESCRIPTION,
    long_description=LONG_DESCRIPTION,
    classifiers=CLASSIFIERS,
    python_requires='>=3.8',
    install_requires=INSTALL_REQUIRES,
    extras_require=EXTRAS_REQUIRE,
    entry_points={'console_scripts': ['spdelab=spdelab.cli.runner:main']},
    zip_safe=True,
)
