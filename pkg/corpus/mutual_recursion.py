def is_even(n):
    if n == 0:
        return 1
    return is_odd(n - 1)

def is_odd(n):
    if n == 0:
        return 0
    return is_even(n - 1)

print(is_even(10), is_odd(10))
print(is_even(7), is_odd(7))
print(is_even(0), is_odd(1))
