@dynamic
def square(n):
    return n * n

@dynamic
def cube(n):
    return n * square(n)

print(square(7))
print(cube(3))
print(square(2) + cube(2))
