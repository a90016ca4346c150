"""Setup script for cx_PyAIMLib.

To install:
    python -m pip install .

"""

from setuptools import setup

modules = [
        "cx_AIMCommands"
]

packages = [
        "cx_AIM"
]

requirements = [
        "cx_Logging",
        "numpy",
        "scipy"
]


setup(
        name = "cx_PyAIMLib",
        version = "1.0",
        description = "Set of Python modules for adaptive multi-task " + \
                "gradient intervention",
        license = "See LICENSE.txt",
        long_description = "Set of Python modules implementing a learned " + \
                "gradient intervention policy for multi-task optimization " + \
                "together with baseline combiners, optimizers, schedulers, " + \
                "benchmarks and the diagnostics used to interpret the policy",
        author = "Anthony Tuininga",
        py_modules = modules,
        packages = packages,
        install_requires = requirements,
        extras_require = dict(test = ["pytest"]),
        entry_points = dict(console_scripts = [
                "aim = cx_AIMCommands:Main"
        ]))
