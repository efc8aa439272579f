@dynamic(defer=True)
def worker(n):
    return n + 1000

worker = load_function("worker")
print(worker(1))
del(worker)
worker = load_function("worker")
print(worker(2))
del(worker)
worker = load_function("worker")
print(worker(3))
