v = [10, 20, 30]
print(v[0], v[1], v[2], len(v))
v[1] = v[0] + v[2]
print(v[1])
z = [0] * 6
i = 0
while i < len(z):
    z[i] = i * i
    i += 1
print(z[5], z[4], z[0])
r = [1.25, 2.5]
r[0] = r[0] * 2.0
print(r[0], r[1], len(r))
