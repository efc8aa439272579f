a = 17
b = 5
print(a + b, a - b, a * b)
print(a // b, a % b)
print(-17 // 5, -17 % 5, 17 // -5, 17 % -5)
print(-a, a - 2 * b)
big = 3037000499
print(big * big)
print(big * big * big)
