/* Display and frame-arena conservation over randomized call trees.
 *
 * Each tree node pushes a frame (sometimes escaping, sometimes one
 * lexical level deeper, sometimes recursing at the same level), writes
 * and reads a slot, visits its children, and pops.  After every node
 * and after every whole tree the display and the arena cursor must be
 * bit-identical to their values before the call.  A separate fixed
 * check drives 100-deep recursion and a proc-dispatch chain.
 *
 * modes: trees | recursion | procs | all (default)
 */

#define _DEFAULT_SOURCE /* setenv under -std=c99 */

#include "oly_rt.h"

#include <string.h>

#include "harness.h"

#define MAX_DEPTH 64
#define TREE_BUDGET 1500   /* per tree: branching is supercritical */
#define TREES 400
#define DISPLAY_CELLS 17   /* runtime display capacity + hidden API cell */

static long nodes;
static long tree_budget;

static long footprint(Int slots) {
    return ((2 + slots) * 8 + 15) & ~15L;
}

/* ---- randomized trees -------------------------------------------------- */

static void tree_walk(Int level, int depth) {
    if (tree_budget <= 0)
        return;
    tree_budget--;
    nodes++;
    Int slots = (Int)(rnd() % 6);
    int escaping = rnd() % 16 == 0;
    size_t used_before = oly_frame_arena_used();
    Frame cell_before = *oly_cell(level);

    Env env = oly_scall_enter(level, slots, escaping);
    Frame mine = env[0];
    if (escaping)
        check(oly_frame_arena_used() == used_before,
              "escaping frame skips the arena",
              (long)oly_frame_arena_used(), (long)used_before);
    else
        check(oly_frame_arena_used() == used_before +
                  (size_t)footprint(slots),
              "cursor advances by one footprint",
              (long)oly_frame_arena_used(),
              (long)(used_before + (size_t)footprint(slots)));
    if (slots) {
        update_int(env, 0, 0, (Int)depth);
        check(lookup_int(env, 0, 0) == (Int)depth, "slot write/read",
              (long)lookup_int(env, 0, 0), depth);
    }

    if (depth < MAX_DEPTH) {
        int kids = (int)(rnd() % 4);
        for (int k = 0; k < kids; k++) {
            Int next = level;
            if (level + 1 < oly_max_lex && (rnd() & 1))
                next = level + 1;   /* nested function, one level deeper */
            tree_walk(next, depth + 1);   /* same level = recursion */
        }
    }

    check(*oly_cell(level) == mine, "display survives the subtree", 0, 0);
    if (slots)
        check(lookup_int(env, 0, 0) == (Int)depth,
              "own slots survive the subtree",
              (long)lookup_int(env, 0, 0), depth);
    oly_scall_leave(level);
    check(*oly_cell(level) == cell_before, "display cell restored", 0, 0);
    check(oly_frame_arena_used() == used_before, "arena cursor restored",
          (long)oly_frame_arena_used(), (long)used_before);
}

static void run_trees(void) {
    Frame snap[DISPLAY_CELLS];
    memcpy(snap, oly_display, sizeof(Frame) * (size_t)(oly_max_lex + 1));
    size_t cursor0 = oly_frame_arena_used();
    int trees = 0;
    for (int t = 0; t < TREES; t++) {
        tree_budget = TREE_BUDGET;
        tree_walk(1, 1);
        check(memcmp(snap, oly_display,
                     sizeof(Frame) * (size_t)(oly_max_lex + 1)) == 0,
              "display bit-identical after tree", t, 0);
        check(oly_frame_arena_used() == cursor0,
              "arena cursor at baseline after tree",
              (long)oly_frame_arena_used(), (long)cursor0);
        trees++;
    }
    fprintf(stderr, "ok trees trees=%d nodes=%ld\n", trees, nodes);
}

/* ---- fixed recursion shape ---------------------------------------------- */

static Frame rec_cells[DISPLAY_CELLS];
static size_t rec_base;

static void recurse(int n) {
    Env env = oly_scall_enter(3, 3, 0);
    update_int(env, 0, 2, (Int)n);
    if (n > 1) {
        recurse(n - 1);
    } else {
        /* 100 live frames, and recursion moved exactly one display cell */
        check(oly_frame_arena_used() - rec_base ==
                  100u * (size_t)footprint(3),
              "recursion depth 100 holds 100 frames",
              (long)(oly_frame_arena_used() - rec_base),
              100 * footprint(3));
        Int moved = oly_max_lex - 1 - 3;
        for (Int i = 0; i <= oly_max_lex; i++)
            if (i != moved)
                check(oly_display[i] == rec_cells[i],
                      "recursion reuses one display entry", (long)i, 0);
    }
    check(lookup_int(env, 0, 2) == (Int)n, "frame intact after callee",
          (long)lookup_int(env, 0, 2), n);
    oly_scall_leave(3);
}

static void run_recursion(void) {
    oly_scall_enter(1, 2, 0);
    oly_scall_enter(2, 2, 0);
    memcpy(rec_cells, oly_display,
           sizeof(Frame) * (size_t)(oly_max_lex + 1));
    rec_base = oly_frame_arena_used();
    recurse(100);
    check(oly_frame_arena_used() == rec_base,
          "recursion unwound to baseline",
          (long)oly_frame_arena_used(), (long)rec_base);
    check(memcmp(rec_cells, oly_display,
                 sizeof(Frame) * (size_t)(oly_max_lex + 1)) == 0,
          "display restored after recursion", 0, 0);
    oly_scall_leave(2);
    oly_scall_leave(1);
    fprintf(stderr, "ok recursion\n");
}

/* ---- proc-dispatch chain -------------------------------------------------- */

static Int rec_entry(Env env, Object self) {
    (void)self;
    Int n = lookup_int(env, 0, 0);
    if (n <= 0)
        return 0;
    OlySlotBits a[1];
    a[0] = OLY_SLOT_INT(n - 1);
    return n + call_proc_int(lookup_proc(env, 1, 0), env, 1, a);
}

static void run_procs(Env env) {
    declare_proc(env, 0, "rec", mk_proc(rec_entry, env, 1));
    Frame snap[DISPLAY_CELLS];
    memcpy(snap, oly_display, sizeof(Frame) * (size_t)(oly_max_lex + 1));
    size_t cursor0 = oly_frame_arena_used();
    OlySlotBits a[1];
    a[0] = OLY_SLOT_INT(64);
    Int got = call_proc_int(lookup_proc(env, 0, 0), env, 1, a);
    check(got == 64 * 65 / 2, "64-deep proc recursion sums", (long)got,
          64 * 65 / 2);
    check(memcmp(snap, oly_display,
                 sizeof(Frame) * (size_t)(oly_max_lex + 1)) == 0,
          "display restored after proc chain", 0, 0);
    check(oly_frame_arena_used() == cursor0,
          "arena cursor restored after proc chain",
          (long)oly_frame_arena_used(), (long)cursor0);
    fprintf(stderr, "ok procs\n");
}

int main(int argc, char **argv) {
    const char *mode = argc > 1 ? argv[1] : "all";

    /* escaping frames persist on the heap; leave headroom for the fuzz */
    setenv("OLY_HEAP_BYTES", "16777216", 0);
    Env env = oly_rt_init(8, 2, 0);
    oly_register("rec", (OlyEntry)rec_entry, 1, 1, 0, 0);

    if (strcmp(mode, "trees") == 0 || strcmp(mode, "all") == 0)
        run_trees();
    if (strcmp(mode, "recursion") == 0 || strcmp(mode, "all") == 0)
        run_recursion();
    if (strcmp(mode, "procs") == 0 || strcmp(mode, "all") == 0)
        run_procs(env);
    return harness_exit(mode);
}
