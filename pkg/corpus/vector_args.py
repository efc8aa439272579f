def fill(v, n):
    for i in range(len(v)):
        v[i] = n + i
    return v

def sum_vec(v):
    total = 0
    for i in range(len(v)):
        total += v[i]
    return total

data = [0] * 6
fill(data, 10)
print(sum_vec(data))
print(data[0], data[5])

def scale(v, f):
    for i in range(len(v)):
        v[i] = v[i] * f

reals = [1.0, 2.0, 4.0]
scale(reals, 0.5)
print(reals[0], reals[1], reals[2])
