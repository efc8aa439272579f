def level1():
    a = 1
    def level2():
        b = 10
        def level3():
            c = 100
            def level4():
                nonlocal a, b, c
                a += 1
                b += 2
                c += 3
                return a * 10000 + b * 100 + c
            return level4()
        return level3()
    first = level2()
    second = level2()
    return first * 1000000 + second

print(level1())
