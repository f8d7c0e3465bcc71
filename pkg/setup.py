from setuptools import setup, find_packages
import os

# Read version from package
def get_version():
    """Get version from package __init__.py"""
    version_file = os.path.join(os.path.dirname(__file__), 'waveguide_imaging', '__init__.py')
    with open(version_file, 'r', encoding='utf-8') as f:
        for line in f:
            if line.startswith('__version__'):
                return line.split('=')[1].strip().strip('"').strip("'")
    raise RuntimeError("Unable to find version string in waveguide_imaging/__init__.py")

# Read long description
def get_long_description():
    """Get long description from README.md"""
    readme_path = os.path.join(os.path.dirname(__file__), 'README.md')
    try:
        with open(readme_path, 'r', encoding='utf-8') as f:
            return f.read()
    except FileNotFoundError:
        return "Modal forward modeling and array imaging in electromagnetic waveguides"

setup(
    name="waveguide-imaging",
    version=get_version(),
    author="Patroclo Picchiaduro",
    author_email="patroclo.wanted@gmail.com",
    description="Modal forward modeling and array imaging in electromagnetic waveguides",
    long_description=get_long_description(),
    long_description_content_type="text/markdown",
    url="https://github.com/PatrocloWanted/WaveguideImaging",
    packages=find_packages(include=["waveguide_imaging", "waveguide_imaging.*"]),
    package_data={"waveguide_imaging": ["presets/*.json"]},
    install_requires=[
        "numpy>=1.22",
        "scipy>=1.8",
    ],
    python_requires=">=3.9",
    classifiers=[
        "Development Status :: 4 - Beta",
        "Intended Audience :: Science/Research",
        "Topic :: Scientific/Engineering :: Physics",
        "Operating System :: OS Independent",
        "Programming Language :: Python :: 3",
        "Environment :: Console",
        "Natural Language :: English",
    ],
    keywords="waveguide electromagnetics imaging migration sparse",
    entry_points={
        "console_scripts": [
            "waveguide-imaging=waveguide_imaging.main:main",
        ],
    },
    include_package_data=True,
    zip_safe=False,
    platforms=["any"],
)
