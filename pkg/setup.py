# coding: utf-8

from io import open

from setuptools import setup, find_packages

with open("README.rst") as f:
    long_desc = f.read()
    ind = long_desc.find("\n")
    long_desc = long_desc[ind + 1:]

setup(
    name="fleetplan",
    packages=find_packages(),
    version="0.1",
    python_requires=">=3.8",
    install_requires=["monty>=2022.9.9", "six", "ruamel.yaml>=0.17",
                      "numpy>=1.22", "scipy>=1.8", "torch>=1.13",
                      "shapely>=2.0", "matplotlib>=3.5"],
    extras_require={"dev": ["pytest", "coverage", "invoke"]},
    package_data={},
    author="Fleetplan Development Team",
    license="MIT",
    description="Learning motion planning from every observed vehicle, "
                "trained and evaluated closed loop in a 2D micro-world.",
    long_description=long_desc,
    keywords=["motion planning", "autonomous driving", "distillation",
              "closed-loop evaluation", "pipeline"],
    classifiers=[
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.8",
        "Development Status :: 4 - Beta",
        "Intended Audience :: Science/Research",
        "License :: OSI Approved :: MIT License",
        "Operating System :: OS Independent",
        "Topic :: Scientific/Engineering :: Artificial Intelligence",
        "Topic :: Software Development :: Libraries :: Python Modules"
    ],
    entry_points={
          'console_scripts': [
              'fleet = fleetplan.cli.fleet:main',
          ]
    }
)
