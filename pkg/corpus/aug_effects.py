calls = 0

def bump():
    global calls
    calls += 1
    return calls

v = [0] * 5
v[bump()] = bump()
print(v[1], v[2], calls)
v[bump()] += 10
print(v[3], calls)
x = 100
x += bump()
print(x, calls)
total = 0
total += bump() + bump()
print(total, calls)
