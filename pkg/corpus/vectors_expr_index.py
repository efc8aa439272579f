def pick(i):
    return i + 1

v = [0] * 8
k = 2
v[pick(k)] = 99
print(v[3])
v[k * 2] = v[pick(k)] - 9
print(v[4])
n = 3
w = [7] * (n + 1)
print(len(w), w[n])
w[n - 1] += w[n]
print(w[2])
