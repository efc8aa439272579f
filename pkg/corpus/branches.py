def classify(n):
    if n < 0:
        return -1
    elif n == 0:
        return 0
    elif n < 100:
        return 1
    else:
        return 2

print(classify(-5), classify(0), classify(42), classify(1000))
x = 7
if x % 2 == 0:
    print(0)
else:
    if x % 3 == 0:
        print(3)
    else:
        print(1)
