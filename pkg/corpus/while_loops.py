n = 0
total = 0
while n < 10:
    total += n
    n += 1
print(total)
a = 1
while a * a < 500:
    a = a + a
print(a)
outer = 0
i = 0
while i < 4:
    j = 0
    while j < 3:
        outer += i * j
        j += 1
    i += 1
print(outer)
