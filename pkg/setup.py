# coding: utf-8
from pathlib import Path
from setuptools import setup, find_packages


here = Path(__file__).parent
packages = find_packages("src")
long_description = (here / "README.md").read_text(encoding="utf-8")
requirements = (here / "requirements.txt").read_text().splitlines()


setup(
    name="py-simam-core",
    version="0.1.0",
    license="MIT",
    description=(
        "Parameter-free SimAM attention in an EfficientNet-style classifier, "
        "with a numpy autograd core and verification oracles"
    ),
    long_description=long_description,
    long_description_content_type="text/markdown",
    packages=packages,
    package_dir={"": "src"},
    package_data={"simam_core": ["configs/*.json"]},
    include_package_data=True,
    python_requires=">=3.8",
    install_requires=requirements,
    extras_require={"tests": ["pytest", "hypothesis"]},
    entry_points={"console_scripts": ["simam = simam_core.cli:main"]},
)
