"""
Command-line front end for running scenario configs.
"""
