def stencil(left, right):
    return 0.5 * (left + right)

def jacobi(nx, max_iters):
    u = [0.0] * nx
    u_new = [0.0] * nx
    u[0] = 10.0
    u_new[0] = 10.0
    norm = 0.0
    for it in range(max_iters):
        norm = 0.0
        for i in range(1, nx - 1):
            u_new[i] = stencil(u[i - 1], u[i + 1])
            diff = u_new[i] - u[i]
            norm = norm + diff * diff
        for i in range(1, nx - 1):
            u[i] = u_new[i]
    return norm

print("start")
residual = jacobi(100, 10000)
print("stop")
print(residual)
