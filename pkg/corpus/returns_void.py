log = 0

def note(code):
    global log
    log = log * 10 + code

def pipeline(n):
    note(1)
    if n > 5:
        note(2)
        return
    note(3)

pipeline(9)
print(log)
pipeline(2)
print(log)

def no_return():
    x = 5

no_return()
print(log)
