total = 0
for i in range(10):
    total += i
print(total)
for j in range(2, 5):
    print(j)
for k in range(10, 0, -3):
    print(k)
s = 0
for i in range(0, 20, 4):
    for j in range(i, i + 2):
        s += j
print(s)
for e in range(3, 3):
    print(999)
print(s + total)
