PAIRS = [(1, 1), (2, 1), (1, 2), (2, 2), (3, 2)]
