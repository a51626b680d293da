from Cython.Build import cythonize
from setuptools import Extension, setup

extensions = [
    Extension(
        "cesaro_vi._kernels",
        ["src/cesaro_vi/_kernels.pyx"],
        # no FMA contraction: tables must match the numpy fallback bit for bit
        extra_compile_args=["-O3", "-ffp-contract=off"],
    )
]

setup(
    ext_modules=cythonize(extensions, compiler_directives={"language_level": "3"}),
)
