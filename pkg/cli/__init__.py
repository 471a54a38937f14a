"""
Command-line surface: generate-data, train-spade, preprocess, train-url, train-baseline, evaluate.
"""
