/* Accessor inlining probe.  Scalar lookup/update must compile to
 * indexed addressing with no function-call overhead; the build
 * disassembles this unit and the tests scan the body for call
 * instructions. */

#include "oly_rt.h"

Real probe_scalars(Env env, Object self) {
    (void)self;
    update_real(env, 0, 0, lookup_real(env, 1, 2) + lookup_real(env, 0, 1));
    update_int(env, 0, 3, lookup_int(env, 2, 0) + lookup_int(env, 0, 3));
    update_real(env, 4, 1, 10.0);
    return lookup_real(env, 0, 0) + (Real)lookup_int(env, 0, 3);
}
