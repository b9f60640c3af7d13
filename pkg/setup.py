"""Build script: compiles the optional NNLS accelerator extension.

The package is fully functional without the extension (a pure-NumPy
implementation of the same solver is selected at import time), so any
compilation failure downgrades to a warning instead of aborting the install.
"""

import warnings

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    """Best-effort build: missing compiler must not block installation."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # noqa: BLE001
            warnings.warn(f"skipping compiled NNLS kernel ({exc}); "
                          "falling back to the pure-Python solver")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:  # noqa: BLE001
            warnings.warn(f"could not compile {ext.name} ({exc}); "
                          "falling back to the pure-Python solver")


def extensions():
    try:
        import numpy
        from Cython.Build import cythonize
    except ImportError:
        return []
    ext = Extension(
        "mmwba.nnls._accel",
        ["src/mmwba/nnls/_accel.pyx"],
        include_dirs=[numpy.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
    return cythonize([ext], language_level="3")


setup(ext_modules=extensions(), cmdclass={"build_ext": OptionalBuildExt})
