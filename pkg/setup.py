import os
from setuptools import setup, find_packages

setup(
    name="superform-lab",
    version="1.0.0",
    packages=find_packages(exclude=["tests", "examples", "examples.*"]),
    py_modules=["main"],
    install_requires=[
        "numpy>=1.24.0",
        "scipy>=1.10.0",
        "pandas>=1.5.0",
        "psutil>=5.9.0",
        "tabulate>=0.9.0"
    ],
    extras_require={
        "test": [
            "pytest>=7.0.0",
            "hypothesis>=6.70.0"
        ]
    },
    entry_points={
        "console_scripts": [
            "superform-lab=main:main"
        ]
    },
    description="Numerical verification of superform, Thom form and torsion form identities on flat bundle germs",
    long_description=open("README.md").read() if os.path.exists("README.md") else "",
    long_description_content_type="text/markdown",
    classifiers=[
        "Programming Language :: Python :: 3",
        "License :: OSI Approved :: MIT License",
        "Operating System :: OS Independent",
        "Topic :: Scientific/Engineering :: Mathematics",
    ],
    python_requires=">=3.10",
)
