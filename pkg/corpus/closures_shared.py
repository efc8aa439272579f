def make_pair():
    value = 0
    def setter(v):
        nonlocal value
        value = v
        return value
    def getter():
        return value
    def both(v):
        setter(v)
        return getter()
    return both

b = make_pair()
print(b(41))
print(b(17))
def apply(f, x):
    return f(x)
print(apply(b, 9))
