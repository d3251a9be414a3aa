from setuptools import setup, find_packages

# Read requirements.txt, ignore comments
try:
    with open("requirements.txt", "r") as f:
        REQUIRES = [
            line.split("#", 1)[0].strip()
            for line in f
            if line.split("#", 1)[0].strip()
        ]
except OSError:
    print("'requirements.txt' not found!")
    REQUIRES = list()

setup(
    name="mpclab",
    version="1.0.0",
    include_package_data=True,
    author="",
    author_email="",
    license="MIT",
    packages=find_packages(include=["mpclab", "mpclab.*"]),
    install_requires=REQUIRES,
    entry_points={"console_scripts": ["mpclab=mpclab.cli:app"]},
    description="MPCLAB: a low-space MPC simulator and component-stability laboratory",
    long_description="""MPCLAB - deterministic low-space MPC algorithms, derandomization and lower-bound constructions""",
    classifiers=[
        # Trove classifiers
        # Full list: https://pypi.python.org/pypi?%3Aaction=list_classifiers
        "License :: OSI Approved :: MIT License",
        "Programming Language :: Python",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
        "Programming Language :: Python :: Implementation :: CPython",
        "Topic :: Scientific/Engineering :: Mathematics",
    ],
    keywords="MPC, distributed algorithms, derandomization, graph algorithms",
    platforms=["any"],
    python_requires=">=3.10, <3.12",
)
