from setuptools import setup, find_packages

# Read requirements.txt, ignore comments
try:
    with open("requirements.txt", "r") as f:
        REQUIRES = [line.split("#", 1)[0].strip() for line in f if line.split("#", 1)[0].strip()]
except OSError:
    print("'requirements.txt' not found!")
    REQUIRES = list()

setup(
    name="tonet-melody",
    version="0.1.0",
    include_package_data=True,
    license="MIT",
    packages=find_packages(exclude=["tests", "tests.*", "examples", "examples.*"]),
    install_requires=REQUIRES,
    extras_require={"dev": ["pytest>=7.4.0"]},
    entry_points={"console_scripts": ["tonet=tonet.cli:main"]},
    description="TONet: tone-octave network for singing melody extraction, with a numpy autodiff engine",
    long_description="""TONet""",
    classifiers=[
        # Trove classifiers
        # Full list: https://pypi.python.org/pypi?%3Aaction=list_classifiers
        "License :: OSI Approved :: MIT License",
        "Programming Language :: Python",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
        "Programming Language :: Python :: 3.12",
        "Programming Language :: Python :: Implementation :: CPython",
        "Topic :: Multimedia :: Sound/Audio :: Analysis",
    ],
    keywords="Melody Extraction, Music Information Retrieval, Pitch Estimation",
    platforms=["any"],
    python_requires=">=3.10",
)
