x = 3
y = 1.5
print(x + y, x * y, x - y)
print(x / 2, 7 / 2)
print(y + 1, 1 + y)
z = x / 1
print(z)
w = 0.0
w += x
print(w)
