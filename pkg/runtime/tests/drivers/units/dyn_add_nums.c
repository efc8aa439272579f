/* Loadable image: loads add, prints add(3, 4), deletes add.
 *
 * Body depth is 1 (defined at module level), so env[1] is the module
 * frame and OLY_API(env, 1) the hidden runtime table.  Every external
 * touch goes through that table, leaving no relocations: the name
 * string for the load comes from a module string slot, not a literal.
 */

#include "oly_rt.h"

void unit_add_nums(Env env, Object self) {
    (void)self;
    update_proc_at(env, 1, 0,
                   OLY_API(env, 1)->load_proc(lookup_str(env, 1, 2), env, 2));
    OlySlotBits args[2];
    args[0] = OLY_SLOT_INT(3);
    args[1] = OLY_SLOT_INT(4);
    Int sum = OLY_API(env, 1)->call_proc_int(lookup_proc(env, 1, 0), env, 2,
                                             args);
    OLY_API(env, 1)->print_int(sum, 1);
    OLY_API(env, 1)->delete_proc(env, 1, 0);
}
