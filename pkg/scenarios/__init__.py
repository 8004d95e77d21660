"""
Scenarios app: preset experiments, disorder averaging and truncated-vs-full comparisons.
"""
