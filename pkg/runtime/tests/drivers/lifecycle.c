/* Dynamic load lifecycle.
 *
 * The main mode replays the canonical deferred-load cycle by hand,
 * exactly as the compiler would emit it: declare a deferred slot NULL,
 * load a driver function, call through it (it loads the deferred one,
 * calls it, prints, deletes it), and then checks that the heap free
 * bytes after the delete equal the bytes before the load and that
 * exactly two loads happened.  Code arrives either from OLY_LOAD_DIR
 * or over the wire, depending on the environment.
 *
 * The remaining modes drive the typed traps one each.
 *
 * modes: main | self_del | null_call | delete_static | unknown
 *      | bad_levels
 */

#include "oly_rt.h"

#include <string.h>

#include "harness.h"

static Int forty(Env env, Object self) {
    (void)env;
    (void)self;
    return 40;
}

int main(int argc, char **argv) {
    const char *mode = argc > 1 ? argv[1] : "main";

    if (strcmp(mode, "bad_levels") == 0) {
        oly_rt_init(0, 0, 0);   /* must trap */
        fprintf(stderr, "unreachable: zero display depth accepted\n");
        return 1;
    }

    Env env = oly_rt_init(2, 8, 1);
    oly_register("add", (OlyEntry)0, 2, 2, 0, 0);
    oly_register("add_nums", (OlyEntry)0, 0, 0, 0, 0);
    oly_register("self_del", (OlyEntry)0, 0, 0, 0, 0);
    oly_register("forty", (OlyEntry)forty, 0, 0, 0, 0);
    declare_str(env, 2, "add");

    if (strcmp(mode, "main") == 0) {
        declare_proc(env, 0, "add", NULL);   /* deferred: bound NULL */
        declare_proc(env, 1, "add_nums", load_proc("add_nums", env, 0));
        Int pre = oly_heap_free_bytes();
        call_proc_void(lookup_proc(env, 0, 1), env, 0, (OlySlotBits *)0);
        check(oly_heap_free_bytes() == pre,
              "post-delete free bytes equal pre-load",
              (long)oly_heap_free_bytes(), (long)pre);
        check(oly_load_count == 2, "exactly two loads",
              (long)oly_load_count, 2);
        check(lookup_proc(env, 0, 0) == NULL, "deleted slot reads NULL",
              0, 0);
        delete_proc(env, 0, 0);   /* second delete is a no-op */
        check(oly_heap_free_bytes() == pre, "double delete changed nothing",
              (long)oly_heap_free_bytes(), (long)pre);
        check(oly_heap_check() == 0, "heap invariants",
              oly_heap_check(), 0);
        fprintf(stderr, "ok lifecycle loads=%lld\n",
                (long long)oly_load_count);
        oly_exit(harness_failures ? 1 : 0);
    }

    if (strcmp(mode, "self_del") == 0) {
        Int pre = oly_heap_free_bytes();
        declare_proc(env, 3, "self_del", load_proc("self_del", env, 0));
        Int r = call_proc_int(lookup_proc(env, 0, 3), env, 0,
                              (OlySlotBits *)0);
        check(r == 41, "self-deleting function returned", (long)r, 41);
        check(oly_heap_free_bytes() == pre,
              "deferred free completed after unwind",
              (long)oly_heap_free_bytes(), (long)pre);
        check(lookup_proc(env, 0, 3) == NULL, "slot cleared", 0, 0);
        check(oly_heap_check() == 0, "heap invariants",
              oly_heap_check(), 0);
        fprintf(stderr, "ok self_del\n");
        oly_exit(harness_failures ? 1 : 0);
    }

    if (strcmp(mode, "null_call") == 0) {
        declare_proc(env, 0, "add", NULL);
        call_proc_int(lookup_proc(env, 0, 0), env, 2, (OlySlotBits *)0);
        fprintf(stderr, "unreachable: NULL proc called\n");
        return 1;
    }

    if (strcmp(mode, "delete_static") == 0) {
        declare_proc(env, 4, "forty", mk_proc(forty, env, 0));
        delete_proc(env, 0, 4);   /* no heap code behind it: must trap */
        fprintf(stderr, "unreachable: static delete accepted\n");
        return 1;
    }

    if (strcmp(mode, "unknown") == 0) {
        load_proc("nope", env, 0);   /* not in the registry: must trap */
        fprintf(stderr, "unreachable: unknown key loaded\n");
        return 1;
    }

    fprintf(stderr, "unknown mode %s\n", mode);
    return 2;
}
