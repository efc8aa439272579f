print(0.1 + 0.2)
print(1.0 / 3.0)
print(2.5 * 4.0, 10.0 - 0.25)
print(1e16, 9999999999999998.0)
print(0.0001, 0.00001)
print(-0.5, 0.5 - 0.5)
print(123456789.123)
print(1.0 / 10000000.0)
