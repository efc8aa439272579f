counter = 0
total = 0.0

def tick(amount):
    global counter, total
    counter += 1
    total += amount
    return counter

def report():
    print(counter, total)

tick(1.5)
tick(2.5)
tick(0.25)
report()
print(tick(10.0))
report()
