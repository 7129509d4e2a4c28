from setuptools import find_packages, setup

setup(
    name='biharm_bench',
    version='0.1',
    author='TODO',
    author_email='TODO@TODO.COM',
    description='Numerical verification of biharmonic Lagrangian submanifolds in complex space forms',
    packages=find_packages(include=['biharm_bench', 'biharm_bench.*']),
    python_requires='>=3.10',
    install_requires=[
        'numpy',
        'pydantic>=2',
        'mpmath',
        'pyyaml',
        'wandb',
    ],
    extras_require={
        'test': [
            'hypothesis',
            'sympy',
            'timeout-decorator',
        ],
    },
    entry_points={
        'console_scripts': [
            'biharm-bench=biharm_bench.experiments.run:main',
        ],
    },
    classifiers=[
        'Programming Language :: Python :: 3',
        'License :: OSI Approved :: MIT License',
        'Operating System :: OS Independent',
    ],
    license='MIT',
)
