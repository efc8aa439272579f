/* Abstract machine runtime for compiled kernels.
 *
 * The machine is an environment of frames addressed through a display:
 * a fixed array of frame pointers indexed by lexical level.  The display
 * is stored reversed, so a function whose body sits at absolute level d
 * receives env = &display[max-1-d]; env[0] is its own frame, env[k]
 * walks outward, and env[d] is the global (module) frame.  One hidden
 * cell past the display, env[d+1], holds the runtime API table so that
 * dynamically loaded code can reach the runtime without relocations.
 *
 * Variable accessors are macros that cast the frame base and index it;
 * the compiler can use indexed addressing from env[0] for locals.
 */

#ifndef OLY_RT_H
#define OLY_RT_H

#include <stddef.h>
#include <stdint.h>
#include <string.h>

typedef int64_t Int;
typedef double Real;
typedef void *Object;
typedef uint64_t OlySlotBits;
typedef OlySlotBits *Frame;
typedef Frame *Env;
typedef const char *OlyStr;

typedef struct OlyComplexCell {
    Real re;
    Real im;
} *Complex;

typedef struct OlyVecCell {
    Int length;
    OlySlotBits data[];
} *Vector;

typedef void (*OlyEntry)(void);

typedef struct OlyProcCell {
    OlyEntry entry;
    Int argc;
    Int slots;
    Int def_level;
    Int escaping;
    OlyStr name;
    Frame *snapshot;        /* captured display, levels 0..def_level */
    void *blob;             /* heap code for dynamically loaded procs */
    Int blob_size;
    Int pending_delete;
} *Proc;

/* ---- typed variable access ---------------------------------------------- */

#define update_real(env, lex_level, offset, value) (((Real*)(env[(lex_level)]))[(offset)]=(Real)((value)))
#define update_int(env, lex_level, offset, value) (((Int*)(env[(lex_level)]))[(offset)]=(Int)((value)))
#define update_vector(env, lex_level, offset, value) (((Vector*)(env[(lex_level)]))[(offset)]=(Vector)((value)))
#define update_complex(env, lex_level, offset, value) (((Complex*)(env[(lex_level)]))[(offset)]=(Complex)((value)))

#define lookup_int(env, lex_level, offset) (((Int*)(env[(lex_level)]))[(offset)])
#define lookup_real(env, lex_level, offset) (((Real*)(env[(lex_level)]))[(offset)])
#define lookup_vector(env, lex_level, offset) (((Vector*)(env[(lex_level)]))[(offset)])
#define lookup_complex(env, lex_level, offset) (((Complex*)(env[(lex_level)]))[(offset)])
#define lookup_proc(env, lex_level, offset) (((Proc*)(env[(lex_level)]))[(offset)])
#define lookup_str(env, lex_level, offset) (((OlyStr*)(env[(lex_level)]))[(offset)])

/* proc slots update locally by default; _at reaches an outer level */
#define update_proc(env, offset, value) (((Proc*)((env)[0]))[(offset)]=(Proc)(value))
#define update_proc_at(env, lex_level, offset, value) (((Proc*)(env[(lex_level)]))[(offset)]=(Proc)(value))
#define declare_str(env, offset, value) (((OlyStr*)((env)[0]))[(offset)]=(value))

#define vector_update_int(vec, index, value) (((Int*)((vec)->data))[(index)]=(Int)((value)))
#define vector_update_real(vec, index, value) (((Real*)((vec)->data))[(index)]=(Real)((value)))
#define vector_lookup_int(vec, index) (((Int*)((vec)->data))[(index)])
#define vector_lookup_real(vec, index) (((Real*)((vec)->data))[(index)])
#define len_vec(vec) ((vec)->length)

#define update_complex_real(cpx, value) ((cpx)->re=(Real)((value)))
#define update_complex_imag(cpx, value) ((cpx)->im=(Real)((value)))
#define lookup_complex_real(cpx) ((cpx)->re)
#define lookup_complex_imag(cpx) ((cpx)->im)

/* ---- slot bit conversion (no rodata, safe inside loaded code) ----------- */

typedef union OlySlotPun {
    OlySlotBits bits;
    Int i;
    Real r;
    void *p;
} OlySlotPun;

#define OLY_SLOT_INT(x) (((OlySlotPun){ .i = (Int)(x) }).bits)
#define OLY_SLOT_REAL(x) (((OlySlotPun){ .r = (Real)(x) }).bits)
#define OLY_SLOT_PTR(x) (((OlySlotPun){ .p = (void *)(x) }).bits)

/* floored integer division and modulo (Python semantics, not C trunc) */
#if defined(__GNUC__)
#define OLY_FORCE_INLINE __attribute__((always_inline)) static inline
#else
#define OLY_FORCE_INLINE static inline
#endif

OLY_FORCE_INLINE Int oly_idiv(Int a, Int b) {
    Int q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0)))
        q -= 1;
    return q;
}

OLY_FORCE_INLINE Int oly_imod(Int a, Int b) {
    Int r = a % b;
    if (r != 0 && ((r < 0) != (b < 0)))
        r += b;
    return r;
}

/* ---- runtime API --------------------------------------------------------- */

typedef Int (*OlyEntryInt)(Env, Object);
typedef Real (*OlyEntryReal)(Env, Object);
typedef Vector (*OlyEntryVector)(Env, Object);
typedef Complex (*OlyEntryComplex)(Env, Object);
typedef Proc (*OlyEntryProc)(Env, Object);
typedef void (*OlyEntryVoid)(Env, Object);

Env oly_rt_init(Int max_lex_levels, Int module_slots, Int need_exec);
void oly_exit(Int status);
void oly_register(OlyStr key, OlyEntry entry, Int argc, Int slots,
                  Int def_level, Int escaping);

Proc oly_mk_proc(OlyEntry entry, Env env, Int argc);
#define mk_proc(entry, env, argc) oly_mk_proc((OlyEntry)(entry), (env), (argc))
Proc load_proc(OlyStr key, Env env, Int argc);
void declare_proc(Env env, Int offset, OlyStr name, Proc proc);
void delete_proc(Env env, Int lex_level, Int offset);

Int call_proc_int(Proc proc, Env env, Int argc, OlySlotBits *args);
Real call_proc_real(Proc proc, Env env, Int argc, OlySlotBits *args);
Vector call_proc_vector(Proc proc, Env env, Int argc, OlySlotBits *args);
Complex call_proc_complex(Proc proc, Env env, Int argc, OlySlotBits *args);
Proc call_proc_proc(Proc proc, Env env, Int argc, OlySlotBits *args);
void call_proc_void(Proc proc, Env env, Int argc, OlySlotBits *args);

/* Static-dispatch call protocol.  A direct call site pushes the callee
 * frame, stores the arguments into its slots, calls the entry by name,
 * and pops.  Both halves are header-inline so the whole sequence folds
 * into the caller; dynamically loaded code never instantiates them (all
 * of its calls go through the API table). */

extern Frame oly_display[];
extern Int oly_max_lex;
extern uint8_t *oly_arena;
extern size_t oly_arena_size;
extern size_t oly_arena_used;
void oly_trap(const char *msg);
void *oly_heap_alloc(Int size);

#define OLY_FRAME_ESCAPING 1u

static inline Frame *oly_cell(Int abs_level) {
    return &oly_display[oly_max_lex - 1 - abs_level];
}

static inline Env oly_scall_enter(Int abs_level, Int slots, Int escaping) {
    size_t size = ((2 + (size_t)slots) * sizeof(OlySlotBits) + 15u) & ~15u;
    OlySlotBits *base;
    if (escaping) {
        base = oly_heap_alloc((Int)size);
    } else {
        if (oly_arena_used + size > oly_arena_size)
            oly_trap("frame arena exhausted");
        base = (OlySlotBits *)(oly_arena + oly_arena_used);
        oly_arena_used += size;
    }
    Frame f = base + 2;
    base[0] = (OlySlotBits)(uintptr_t)*oly_cell(abs_level);
    base[1] = ((uint64_t)abs_level << 32) | ((uint64_t)slots << 16) |
              (escaping ? OLY_FRAME_ESCAPING : 0);
    if (slots)
        memset(f, 0, (size_t)slots * sizeof(OlySlotBits));
    *oly_cell(abs_level) = f;
    return oly_cell(abs_level);
}

static inline void oly_scall_leave(Int abs_level) {
    Frame f = *oly_cell(abs_level);
    OlySlotBits *base = f - 2;
    *oly_cell(abs_level) = (Frame)(uintptr_t)base[0];
    if (!(base[1] & OLY_FRAME_ESCAPING)) {
        Int slots = (Int)((base[1] >> 16) & 0xFFFF);
        size_t size = ((2 + (size_t)slots) * sizeof(OlySlotBits) + 15u) & ~15u;
        if ((uint8_t *)base != oly_arena + oly_arena_used - size)
            oly_trap("frame stack corrupted");
        oly_arena_used -= size;
    }
}

/* Direct (static-dispatch) call sites of non-escaping functions keep the
 * callee frame in caller stack storage: the frame dies LIFO with the call
 * expression, so the C stack is its arena.  Only the display install and
 * restore touch shared state. */

static inline Env oly_frame_bind(OlySlotBits *base, Int abs_level,
                                 Int slots) {
    Frame f = base + 2;
    base[0] = (OlySlotBits)(uintptr_t)*oly_cell(abs_level);
    base[1] = ((uint64_t)abs_level << 32) | ((uint64_t)slots << 16);
    if (slots)
        memset(f, 0, (size_t)slots * sizeof(OlySlotBits));
    *oly_cell(abs_level) = f;
    return oly_cell(abs_level);
}

static inline void oly_frame_unbind(Int abs_level) {
    Frame f = *oly_cell(abs_level);
    *oly_cell(abs_level) = (Frame)(uintptr_t)f[-2];
}

Vector oly_alloc_vector(Int length);
Vector oly_alloc_vector_fill(Int length, OlySlotBits fill);
Complex oly_alloc_complex(Real re, Real im);

void oly_print_int(Int value, Int last);
void oly_print_real(Real value, Int last);
void oly_print_str(OlyStr value, Int last);
void oly_print_nl(void);
void oly_format_real(char *buf, Real value);  /* repr-compatible */

/* heap and frame arena (exposed for the test harness) */
void *oly_heap_alloc(Int size);
void oly_heap_free(void *ptr);
Int oly_heap_free_bytes(void);
Int oly_heap_total_bytes(void);
int oly_heap_check(void);
size_t oly_frame_arena_used(void);
extern Int oly_load_count;

/* API table served through the hidden display cell for loaded code */
typedef struct OlyApi {
    Int (*call_proc_int)(Proc, Env, Int, OlySlotBits *);
    Real (*call_proc_real)(Proc, Env, Int, OlySlotBits *);
    Vector (*call_proc_vector)(Proc, Env, Int, OlySlotBits *);
    Complex (*call_proc_complex)(Proc, Env, Int, OlySlotBits *);
    Proc (*call_proc_proc)(Proc, Env, Int, OlySlotBits *);
    void (*call_proc_void)(Proc, Env, Int, OlySlotBits *);
    Proc (*load_proc)(OlyStr, Env, Int);
    void (*declare_proc)(Env, Int, OlyStr, Proc);
    void (*delete_proc)(Env, Int, Int);
    Vector (*alloc_vector)(Int);
    Vector (*alloc_vector_fill)(Int, OlySlotBits);
    Complex (*alloc_complex)(Real, Real);
    void (*print_int)(Int, Int);
    void (*print_real)(Real, Int);
    void (*print_str)(OlyStr, Int);
    void (*print_nl)(void);
} OlyApi;

#define OLY_API(env, depth) ((const OlyApi *)((env)[(depth) + 1]))

#endif /* OLY_RT_H */
