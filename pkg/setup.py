import numpy
from setuptools import Extension, setup
from Cython.Build import cythonize

# No -ffast-math: the solvers rely on IEEE semantics (denormals, exact zeros).
extensions = [
    Extension(
        "fdrelax._kernels",
        ["src/fdrelax/_kernels.pyx"],
        include_dirs=[numpy.get_include()],
        extra_compile_args=["-O3"],
    )
]

setup(
    ext_modules=cythonize(
        extensions,
        compiler_directives={
            "language_level": 3,
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
            "initializedcheck": False,
        },
    )
)
