from pathlib import Path

from setuptools import setup

consts = {}
exec((Path("exlife") / "const.py").read_text(encoding="utf-8"), consts)  # noqa: S102

setup(
    name="pyExLife",
    packages=["exlife"],
    install_requires=["networkx>=3.0"],
    package_data={"exlife": ["py.typed"]},
    entry_points={"console_scripts": ["exlife=exlife.cli:main"]},
    version=consts["__version__"],
    description="Exception-aware API lifecycle analysis for EXIR programs",
    python_requires=">=3.11.0",
    classifiers=[
        "Intended Audience :: Developers",
        "Operating System :: OS Independent",
        "Programming Language :: Python",
        "Programming Language :: Python :: 3",
        "Topic :: Software Development :: Quality Assurance",
        "Topic :: Software Development :: Libraries :: Python Modules",
        "License :: OSI Approved :: GNU General Public License v3 (GPLv3)",
    ],
)
