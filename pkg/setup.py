from setuptools import setup, find_packages

setup(
    name='samplesched',
    version='0.1',
    license='BSD',
    packages=find_packages(exclude=['test']),
    install_requires=['numpy', 'scipy', 'pandas'],
    extras_require={'test': ['pytest', 'hypothesis']},
    entry_points={'console_scripts': ['sample-sched=samplesched.cli:main']},
    description='Exact and simulated analysis of scheduling by a single sampled processing time per job',
    keywords='scheduling stochastic weighted-completion-time sampling',
    python_requires='>=3.8',
    classifiers=['License :: OSI Approved :: BSD License',
                 'Intended Audience :: Science/Research']
)
