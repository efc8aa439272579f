def average(v):
    total = 0.0
    for i in range(len(v)):
        total += v[i]
    return total / len(v)

xs = [0.0] * 10
for i in range(10):
    xs[i] = 1.0 / (i + 1)
print(average(xs))

acc = 0.0
step = 0.1
for i in range(10):
    acc += step
print(acc)
print(acc == 1.0)
