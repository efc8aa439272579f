def make_counter(start):
    count = start
    def bump(step):
        nonlocal count
        count += step
        return count
    return bump

c1 = make_counter(100)
c2 = make_counter(0)
print(c1(1))
print(c2(5))
print(c1(10))
print(c2(5))
print(c1(0))
