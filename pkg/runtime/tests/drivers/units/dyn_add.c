/* Loadable image: add(x, y) -> x + y.  Arguments are the first two
 * slots of the local frame; nothing else is touched, so the compiled
 * bytes are fully self-contained. */

#include "oly_rt.h"

Int unit_add(Env env, Object self) {
    (void)self;
    return lookup_int(env, 0, 0) + lookup_int(env, 0, 1);
}
