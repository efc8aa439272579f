def l1(a):
    def l2(b):
        def l3(c):
            def l4(d):
                def l5(e):
                    return a + b + c + d + e
                return l5(5)
            return l4(4)
        return l3(3)
    return l2(2)

print(l1(1))

def spine(n):
    def rib():
        return n * n
    def walk(k):
        if k == 0:
            return rib()
        return walk(k - 1) + 1
    return walk(3)

print(spine(6))
