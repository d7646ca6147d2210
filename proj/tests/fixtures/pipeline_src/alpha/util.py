def foo():
    return 1


def helper(x):
    return x * 2
