@dynamic
def make_adder(k):
    def add_k(n):
        return n + k
    return add_k

plus5 = make_adder(5)
plus9 = make_adder(9)
print(plus5(10))
print(plus9(10))
print(plus5(plus9(0)))
