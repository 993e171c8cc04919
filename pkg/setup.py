"""Build the optional compiled kernel; the package falls back to pure Python without it."""
import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("MEMSDELAY_NO_EXT") != "1":
    try:
        from Cython.Build import cythonize
    except ImportError:
        cythonize = None
    if cythonize is not None:
        ext_modules = cythonize(
            [
                Extension(
                    "memsdelay._ckernels",
                    ["src/memsdelay/_ckernels.pyx"],
                    # contraction into FMA would break bitwise parity with the fallback
                    extra_compile_args=["-O2", "-ffp-contract=off"],
                    libraries=["m"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
