"""Build script for the optional compiled kernels.

The extension links against numpy's C random-number API (libnpyrandom); if
Cython or a C compiler is unavailable the build degrades to a pure-Python
install and irgtail selects its numpy fallback at import time.
"""

import os

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class optional_build_ext(build_ext):
    """Build the extension if possible; otherwise install pure-Python."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # compiler missing, headers missing, ...
            print(f"warning: compiled kernels skipped ({exc}); "
                  "irgtail will use the pure-Python backend")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            print(f"warning: building {ext.name} failed ({exc}); "
                  "irgtail will use the pure-Python backend")


def extensions():
    if not os.path.exists("src/irgtail/_kernels.pyx"):
        return []
    try:
        import numpy as np
        from Cython.Build import cythonize
    except ImportError:
        return []
    # random_standard_uniform / random_poisson live in the static library
    # shipped inside numpy/random/lib; without it the module builds but
    # fails at import with undefined symbols.
    rand_lib = os.path.join(os.path.dirname(np.random.__file__), "lib")
    ext = Extension(
        "irgtail._kernels",
        ["src/irgtail/_kernels.pyx"],
        include_dirs=[np.get_include()],
        library_dirs=[rand_lib],
        libraries=["npyrandom"],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        extra_compile_args=["-O3"],
    )
    return cythonize([ext], language_level=3)


setup(
    ext_modules=extensions(),
    cmdclass={"build_ext": optional_build_ext},
)
