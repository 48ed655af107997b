from setuptools import setup, find_packages

setup(
    name="wafom-nets",
    version="0.1.0",
    description="Digital nets over Z_b with Walsh figure of merit, error bounds and net search",
    packages=find_packages(where="src"),
    package_dir={"": "src"},
    entry_points={
        "console_scripts": [
            "wafom-nets=wafom_nets.cli:main",
        ],
    },
    install_requires=[
        "numpy>=1.22",
        "scipy>=1.8",
        "mpmath>=1.2",
    ],
    extras_require={
        "test": ["pytest>=7.0"],
    },
    python_requires=">=3.8",
    classifiers=[
        "Development Status :: 3 - Alpha",
        "Intended Audience :: Science/Research",
        "Topic :: Scientific/Engineering :: Mathematics",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.8",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
    ],
)
