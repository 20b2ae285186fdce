from setuptools import setup, find_packages


setup(
    name="dqnn",
    version="0.0.1",
    packages=find_packages(exclude=["examples", "examples.*", "scripts"]),
    package_data={
        '': ['*.json']
    },
    install_requires=[
        "numpy>=1.22",
        "scipy>=1.8",
    ],
    extras_require={
        "debug": ["pytest>=7.0"]
    },
    entry_points={
        "console_scripts": ["dqnn=dqnn.cli:main"]
    },
    python_requires=">=3.8",
)
