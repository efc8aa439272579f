print("hello, world")
print("value:", 42)
print("pi is about", 3.14159)
print("a", "b", "c")
print("")
print("mixed", 1, 2.0, "end")
n = 3
print("n =", n, "n squared =", n * n)
