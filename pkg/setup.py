"""
Setup configuration for pssmp-limits
"""
from setuptools import setup, find_packages

setup(
    name="pssmp-limits",
    version="1.0.0",
    description="Simulation and limit-law checks for increasing self-similar Markov processes",
    author="pssmp-limits developers",
    packages=find_packages(exclude=["tests*"]),
    py_modules=["app"],
    package_data={"pssmp_limits": ["schemas/*.schema.json"]},
    install_requires=[
        "numpy>=1.26.0",
        "scipy>=1.11.0",
        "pyyaml==6.0.1",
        "jsonschema>=4.18.0",
    ],
    entry_points={
        "console_scripts": ["pssmp-limits=app:main"],
    },
    python_requires=">=3.10",
    classifiers=[
        "Development Status :: 4 - Beta",
        "Intended Audience :: Science/Research",
        "License :: OSI Approved :: MIT License",
        "Programming Language :: Python :: 3.12",
    ],
)
