from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    # no Cython: install the pure-Python kernels only
    ext_modules = []
else:
    ext_modules = cythonize(
        # optional: a failed compile leaves the Python fallback in place
        [Extension("neatgames._core", ["src/neatgames/_core.pyx"], extra_compile_args=["-O3"],
                   optional=True)],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
