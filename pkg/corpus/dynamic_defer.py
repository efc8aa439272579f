@dynamic(defer=True)
def helper(a, b):
    return a * 10 + b

@dynamic
def driver(n):
    global helper
    helper = load_function("helper")
    return helper(n, n + 1)

print(driver(4))
print(helper(1, 2))
