x = 10
y = 20

def shadow():
    x = 1
    return x + y

def touch_global():
    global x
    x = x + 5
    return x

print(shadow(), x)
print(touch_global(), x)
def outer():
    y = 2
    def inner():
        y = 3
        return y
    return inner() * 10 + y
print(outer(), y)
