a = 4
b = 7
print(a < b, a <= b, a > b, a >= b)
print(a == b, a != b, a == 4)
x = 2.5
y = 2.5
print(x == y, x < y, x != y)
print(1 < 2.0, 3.0 >= 3)
flag = a < b
if flag:
    print(flag)
