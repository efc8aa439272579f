def double(n):
    return n * 2

def triple(n):
    return n * 3

def compose(f, g, x):
    return f(g(x))

print(compose(double, triple, 5))
h = double
print(h(21))
h = triple
print(h(21))

def choose(flag):
    if flag:
        return double
    return triple

picked = choose(1)
print(picked(8))
picked = choose(0)
print(picked(8))
