from setuptools import setup, find_packages


setup(
    name='plcauchy',
    version='0.1.0',
    packages=find_packages(exclude=['tests', 'examples', 'examples.*']),
    description='Cauchy-integral solver for p-Laplace boundary value problems above Lipschitz graphs',
    install_requires = [
        "numpy",
        "scipy>=1.12",
        "loguru",
        "tenacity",
        "pyyaml",
        "tomli; python_version < '3.11'",
    ],
    entry_points={
        'console_scripts': ['plcauchy=plcauchy.cli:main'],
    },
    python_requires = '>=3.9',
    include_package_data=True,
    zip_safe=False,
)
