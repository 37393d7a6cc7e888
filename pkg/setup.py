"""Build the optional compiled simulation kernel.

The package works without it (a pure-Python kernel is selected at import
time); building the extension just makes closed-loop sweeps much faster.
-ffp-contract=off keeps the compiled kernel bit-identical to the
pure-Python one, which the parity tests rely on.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "pedbrake._kernel._loop_cy",
                ["src/pedbrake/_kernel/_loop_cy.pyx"],
                extra_compile_args=["-O3", "-ffp-contract=off"],
            )
        ],
        language_level="3",
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
