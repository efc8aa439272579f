/* Runtime kernel support: heap, display, procedures, loading, printing.
 *
 * Everything lives in one flat heap (frames, vectors, proc records, and
 * loaded code), managed by a first-fit address-ordered free list with
 * immediate coalescing.  When the program contains dynamically loaded
 * functions the whole heap is mapped executable; code is copied in and
 * run in place.
 */

#define _DEFAULT_SOURCE /* MAP_ANONYMOUS under -std=c99 */

#include "oly_rt.h"

#include <math.h>
#include <stdio.h>
#include <stdlib.h>
#include <string.h>
#include <sys/mman.h>
#include <time.h>

#define OLY_MAX_DISPLAY 16
#define OLY_REGISTRY_CAP 512
#define OLY_ACTIVE_CAP 256
#define OLY_DEFAULT_HEAP (1u << 20)
#define OLY_DEFAULT_ARENA (1u << 20)

Frame oly_display[OLY_MAX_DISPLAY + 1];
Int oly_max_lex;
static int oly_wire;
static int oly_mark_times;
static long oly_output_seq;
static const char *oly_load_dir;
Int oly_load_count;

static void oly_fatal(const char *msg) {
    fprintf(stderr, "oly: %s\n", msg);
    fflush(stderr);
    exit(70);
}

/* ---- heap ---------------------------------------------------------------- */
/* Block header is 16 bytes: payload size (multiple of 16, >= 16) and flags
 * (bit 0 set when free).  Free blocks keep an address-ordered singly linked
 * list threaded through the first payload word. */

typedef struct OlyBlock {
    uint64_t size;
    uint64_t flags;
} OlyBlock;

#define OLY_BLOCK_FREE 1u
#define OLY_HEAP_ALIGN 16
#define OLY_MIN_PAYLOAD 16

static uint8_t *oly_heap_base;
static uint8_t *oly_heap_end;
static OlyBlock *oly_free_head;

static OlyBlock *oly_block_next_addr(OlyBlock *b) {
    return (OlyBlock *)((uint8_t *)(b + 1) + b->size);
}

static OlyBlock **oly_free_link(OlyBlock *b) {
    return (OlyBlock **)(b + 1);
}

static void oly_heap_init(Int size, int need_exec) {
    int prot = PROT_READ | PROT_WRITE;
    if (need_exec) {
        if (getenv("OLY_FORCE_NOEXEC"))
            oly_fatal("executable heap unavailable");
        prot |= PROT_EXEC;
    }
    size = (size + OLY_HEAP_ALIGN - 1) & ~(Int)(OLY_HEAP_ALIGN - 1);
    void *mem = mmap(NULL, (size_t)size, prot,
                     MAP_PRIVATE | MAP_ANONYMOUS, -1, 0);
    if (mem == MAP_FAILED)
        oly_fatal("heap map failed");
    oly_heap_base = (uint8_t *)mem;
    oly_heap_end = oly_heap_base + size;
    OlyBlock *b = (OlyBlock *)oly_heap_base;
    b->size = (uint64_t)(size - (Int)sizeof(OlyBlock));
    b->flags = OLY_BLOCK_FREE;
    *oly_free_link(b) = NULL;
    oly_free_head = b;
}

void *oly_heap_alloc(Int size) {
    if (size < OLY_MIN_PAYLOAD)
        size = OLY_MIN_PAYLOAD;
    size = (size + OLY_HEAP_ALIGN - 1) & ~(Int)(OLY_HEAP_ALIGN - 1);
    OlyBlock **link = &oly_free_head;
    while (*link) {
        OlyBlock *b = *link;
        if ((Int)b->size >= size) {
            Int surplus = (Int)b->size - size;
            if (surplus >= (Int)sizeof(OlyBlock) + OLY_MIN_PAYLOAD) {
                b->size = (uint64_t)size;
                OlyBlock *rest = oly_block_next_addr(b);
                rest->size = (uint64_t)(surplus - (Int)sizeof(OlyBlock));
                rest->flags = OLY_BLOCK_FREE;
                *oly_free_link(rest) = *oly_free_link(b);
                *link = rest;
            } else {
                *link = *oly_free_link(b);
            }
            b->flags = 0;
            return b + 1;
        }
        link = oly_free_link(b);
    }
    oly_fatal("heap exhausted");
    return NULL;
}

void oly_heap_free(void *ptr) {
    if (!ptr)
        return;
    OlyBlock *b = (OlyBlock *)ptr - 1;
    if ((uint8_t *)b < oly_heap_base || (uint8_t *)ptr > oly_heap_end ||
        (b->flags & OLY_BLOCK_FREE))
        oly_fatal("bad free");
    OlyBlock **link = &oly_free_head;
    while (*link && *link < b)
        link = oly_free_link(*link);
    OlyBlock *next = *link;
    b->flags = OLY_BLOCK_FREE;
    *oly_free_link(b) = next;
    *link = b;
    if (next && oly_block_next_addr(b) == next) {
        b->size += sizeof(OlyBlock) + next->size;
        *oly_free_link(b) = *oly_free_link(next);
    }
    if (link != &oly_free_head) {
        OlyBlock *prev = (OlyBlock *)((uint8_t *)link - sizeof(OlyBlock));
        if (oly_block_next_addr(prev) == b) {
            prev->size += sizeof(OlyBlock) + b->size;
            *oly_free_link(prev) = *oly_free_link(b);
        }
    }
}

Int oly_heap_free_bytes(void) {
    Int total = 0;
    for (OlyBlock *b = oly_free_head; b; b = *oly_free_link(b))
        total += (Int)b->size;
    return total;
}

Int oly_heap_total_bytes(void) {
    return (Int)(oly_heap_end - oly_heap_base);
}

int oly_heap_check(void) {
    /* walk the region by headers, then reconcile with the free list */
    OlyBlock *b = (OlyBlock *)oly_heap_base;
    Int free_blocks = 0;
    int prev_free = 0;
    while ((uint8_t *)b < oly_heap_end) {
        if (b->size % OLY_HEAP_ALIGN || b->size < OLY_MIN_PAYLOAD)
            return 1;
        if ((uint8_t *)oly_block_next_addr(b) > oly_heap_end)
            return 2;
        if (b->flags & OLY_BLOCK_FREE) {
            if (prev_free)
                return 3;  /* missed coalesce */
            prev_free = 1;
            free_blocks++;
        } else {
            prev_free = 0;
        }
        b = oly_block_next_addr(b);
    }
    if ((uint8_t *)b != oly_heap_end)
        return 4;
    Int listed = 0;
    OlyBlock *prev = NULL;
    for (OlyBlock *f = oly_free_head; f; f = *oly_free_link(f)) {
        if (!(f->flags & OLY_BLOCK_FREE))
            return 5;
        if (prev && prev >= f)
            return 6;  /* not address ordered */
        prev = f;
        listed++;
    }
    return listed == free_blocks ? 0 : 7;
}

/* ---- wire protocol -------------------------------------------------------- */

static void oly_put_u32(uint8_t *p, uint32_t v) {
    p[0] = (uint8_t)v;
    p[1] = (uint8_t)(v >> 8);
    p[2] = (uint8_t)(v >> 16);
    p[3] = (uint8_t)(v >> 24);
}

static void oly_wire_send(uint8_t tag, const void *payload, uint32_t len) {
    uint8_t head[5];
    head[0] = tag;
    oly_put_u32(head + 1, len);
    fwrite(head, 1, 5, stdout);
    if (len)
        fwrite(payload, 1, len, stdout);
    fflush(stdout);
}

static void oly_read_exact(void *buf, size_t n) {
    if (fread(buf, 1, n, stdin) != n)
        oly_fatal("wire read failed");
}

/* ---- printing ------------------------------------------------------------- */

static char oly_line[65536];
static size_t oly_line_len;

static void oly_line_push(const char *s) {
    size_t n = strlen(s);
    if (oly_line_len + n >= sizeof(oly_line))
        oly_fatal("output line too long");
    memcpy(oly_line + oly_line_len, s, n);
    oly_line_len += n;
}

static void oly_line_flush(void) {
    oly_line[oly_line_len++] = '\n';
    if (oly_mark_times) {
        /* Pipe delivery can lag the print by milliseconds, so host-side
         * arrival times cannot measure in-kernel intervals.  Report the
         * emission time out of band instead. */
        struct timespec ts;
        clock_gettime(CLOCK_MONOTONIC, &ts);
        fprintf(stderr, "OLY_TS %ld %ld.%09ld\n", oly_output_seq,
                (long)ts.tv_sec, ts.tv_nsec);
        fflush(stderr);
    }
    oly_output_seq++;
    if (oly_wire)
        oly_wire_send(0x02, oly_line, (uint32_t)oly_line_len);
    else {
        fwrite(oly_line, 1, oly_line_len, stdout);
        fflush(stdout);
    }
    oly_line_len = 0;
}

static void oly_print_sep(Int last) {
    if (last)
        oly_line_flush();
    else
        oly_line_push(" ");
}

void oly_format_real(char *out, Real v) {
    if (isnan(v)) {
        strcpy(out, "nan");
        return;
    }
    if (isinf(v)) {
        strcpy(out, v < 0 ? "-inf" : "inf");
        return;
    }
    if (v == 0.0) {
        strcpy(out, signbit(v) ? "-0.0" : "0.0");
        return;
    }
    char tmp[64];
    int prec;
    for (prec = 0; prec < 17; prec++) {
        snprintf(tmp, sizeof tmp, "%.*e", prec, v);
        if (strtod(tmp, NULL) == v)
            break;
    }
    /* split "d.ddddde+XX" into sign, digit string, decimal exponent */
    const char *p = tmp;
    const char *sign = "";
    if (*p == '-') {
        sign = "-";
        p++;
    }
    char digits[32];
    int ndig = 0;
    for (; *p && *p != 'e'; p++)
        if (*p != '.')
            digits[ndig++] = *p;
    int exp = atoi(p + 1);
    while (ndig > 1 && digits[ndig - 1] == '0')
        ndig--;
    digits[ndig] = '\0';
    /* same notation switch as Python repr: scientific outside [1e-4, 1e16) */
    if (exp >= 16 || exp <= -5) {
        if (ndig == 1)
            sprintf(out, "%s%se%c%02d", sign, digits,
                    exp < 0 ? '-' : '+', exp < 0 ? -exp : exp);
        else
            sprintf(out, "%s%c.%se%c%02d", sign, digits[0], digits + 1,
                    exp < 0 ? '-' : '+', exp < 0 ? -exp : exp);
    } else if (exp >= ndig - 1) {
        sprintf(out, "%s%s%.*s.0", sign, digits, exp - (ndig - 1),
                "000000000000000000");
    } else if (exp >= 0) {
        sprintf(out, "%s%.*s.%s", sign, exp + 1, digits, digits + exp + 1);
    } else {
        sprintf(out, "%s0.%.*s%s", sign, -exp - 1, "000000000000000000",
                digits);
    }
}

void oly_print_int(Int value, Int last) {
    char buf[32];
    snprintf(buf, sizeof buf, "%lld", (long long)value);
    oly_line_push(buf);
    oly_print_sep(last);
}

void oly_print_real(Real value, Int last) {
    char buf[64];
    oly_format_real(buf, value);
    oly_line_push(buf);
    oly_print_sep(last);
}

void oly_print_str(OlyStr value, Int last) {
    oly_line_push(value);
    oly_print_sep(last);
}

void oly_print_nl(void) {
    oly_line_flush();
}

/* ---- display and frames ---------------------------------------------------- */
/* Frames carry a 16-byte header below slot 0: the shadowed display cell and
 * a packed (level, slots, flags) word.  Frames of functions that declare
 * nested functions are flagged escaping and survive their activation, since
 * closures capture the frame pointer itself. */

/* Non-escaping frames die strictly LIFO, so they come from a bump arena
 * instead of the heap: push advances a cursor, pop rolls it back.  Only
 * escaping frames (captured by closures) pay for heap allocation, and
 * those are never freed.  Push and pop themselves (oly_scall_enter and
 * oly_scall_leave) are inline in the header. */

uint8_t *oly_arena;
size_t oly_arena_size;
size_t oly_arena_used;

void oly_trap(const char *msg) {
    oly_fatal(msg);
}

size_t oly_frame_arena_used(void) {
    return oly_arena_used;
}

/* ---- function registry ------------------------------------------------------ */

typedef struct OlyRegRow {
    OlyStr key;
    OlyEntry entry;
    Int argc;
    Int slots;
    Int def_level;
    Int escaping;
} OlyRegRow;

static OlyRegRow oly_registry[OLY_REGISTRY_CAP];
static Int oly_registry_len;

void oly_register(OlyStr key, OlyEntry entry, Int argc, Int slots,
                  Int def_level, Int escaping) {
    if (oly_registry_len == OLY_REGISTRY_CAP)
        oly_fatal("registry full");
    OlyRegRow *r = &oly_registry[oly_registry_len++];
    r->key = key;
    r->entry = entry;
    r->argc = argc;
    r->slots = slots;
    r->def_level = def_level;
    r->escaping = escaping;
}

static OlyRegRow *oly_reg_by_key(OlyStr key) {
    for (Int i = 0; i < oly_registry_len; i++)
        if (strcmp(oly_registry[i].key, key) == 0)
            return &oly_registry[i];
    oly_fatal("unknown function key");
    return NULL;
}

static OlyRegRow *oly_reg_by_entry(OlyEntry entry) {
    for (Int i = 0; i < oly_registry_len; i++)
        if (oly_registry[i].entry == entry)
            return &oly_registry[i];
    oly_fatal("unregistered function entry");
    return NULL;
}

/* ---- procedures -------------------------------------------------------------- */

static Proc oly_active[OLY_ACTIVE_CAP];
static Int oly_active_top;

static void oly_free_proc(Proc p) {
    if (p->snapshot)
        oly_heap_free(p->snapshot);
    if (p->blob)
        oly_heap_free(p->blob);
    oly_heap_free(p);
}

static Proc oly_new_proc(OlyRegRow *row, OlyEntry entry, Int argc,
                         void *blob, Int blob_size) {
    if (argc != row->argc)
        oly_fatal("declared arity disagrees with registry");
    Proc p = oly_heap_alloc(sizeof(struct OlyProcCell));
    p->entry = entry;
    p->argc = row->argc;
    p->slots = row->slots;
    p->def_level = row->def_level;
    p->escaping = row->escaping;
    p->name = row->key;
    p->blob = blob;
    p->blob_size = blob_size;
    p->pending_delete = 0;
    Int n = row->def_level + 1;
    p->snapshot = oly_heap_alloc(n * (Int)sizeof(Frame));
    for (Int l = 0; l < n; l++)
        p->snapshot[l] = *oly_cell(l);
    return p;
}

Proc oly_mk_proc(OlyEntry entry, Env env, Int argc) {
    (void)env;
    OlyRegRow *row = oly_reg_by_entry(entry);
    return oly_new_proc(row, entry, argc, NULL, 0);
}

static void *oly_fetch_code(OlyStr key, Int *size_out) {
    if (oly_wire) {
        oly_wire_send(0x01, key, (uint32_t)strlen(key));
        uint8_t status;
        oly_read_exact(&status, 1);
        if (status != 0)
            oly_fatal("host refused function load");
        uint8_t lenbuf[4];
        oly_read_exact(lenbuf, 4);
        uint32_t size = (uint32_t)lenbuf[0] | ((uint32_t)lenbuf[1] << 8) |
                        ((uint32_t)lenbuf[2] << 16) |
                        ((uint32_t)lenbuf[3] << 24);
        void *blob = oly_heap_alloc((Int)size);
        oly_read_exact(blob, size);
        *size_out = (Int)size;
        return blob;
    }
    if (oly_load_dir) {
        char path[1024];
        snprintf(path, sizeof path, "%s/%s.bin", oly_load_dir, key);
        FILE *fp = fopen(path, "rb");
        if (!fp)
            oly_fatal("function image not found");
        fseek(fp, 0, SEEK_END);
        long size = ftell(fp);
        fseek(fp, 0, SEEK_SET);
        void *blob = oly_heap_alloc((Int)size);
        if (fread(blob, 1, (size_t)size, fp) != (size_t)size)
            oly_fatal("short function image");
        fclose(fp);
        *size_out = (Int)size;
        return blob;
    }
    oly_fatal("no function loader available");
    return NULL;
}

Proc load_proc(OlyStr key, Env env, Int argc) {
    (void)env;
    OlyRegRow *row = oly_reg_by_key(key);
    Int size = 0;
    void *blob = oly_fetch_code(key, &size);
    __builtin___clear_cache((char *)blob, (char *)blob + size);
    oly_load_count++;
    return oly_new_proc(row, (OlyEntry)blob, argc, blob, size);
}

void declare_proc(Env env, Int offset, OlyStr name, Proc proc) {
    (void)name;
    ((Proc *)env[0])[offset] = proc;
}

static int oly_proc_active(Proc p) {
    for (Int i = 0; i < oly_active_top; i++)
        if (oly_active[i] == p)
            return 1;
    return 0;
}

void delete_proc(Env env, Int lex_level, Int offset) {
    Proc p = lookup_proc(env, lex_level, offset);
    ((Proc *)env[lex_level])[offset] = NULL;
    if (!p)
        return;
    if (!p->blob)
        oly_fatal("delete of a statically linked function");
    if (oly_proc_active(p))
        p->pending_delete = 1;  /* freed when its last activation returns */
    else
        oly_free_proc(p);
}

static Env oly_proc_enter(Proc p, Int argc, OlySlotBits *args, Frame *save) {
    if (!p)
        oly_fatal("call through an unloaded function slot");
    if (argc != p->argc)
        oly_fatal("call arity mismatch");
    if (oly_active_top == OLY_ACTIVE_CAP)
        oly_fatal("call depth exceeded");
    Int n = p->def_level + 1;
    for (Int l = 0; l < n; l++) {
        save[l] = *oly_cell(l);
        *oly_cell(l) = p->snapshot[l];
    }
    Env callee = oly_scall_enter(p->def_level + 1, p->slots, p->escaping);
    Frame f = callee[0];
    for (Int i = 0; i < argc; i++)
        f[i] = args[i];
    oly_active[oly_active_top++] = p;
    return callee;
}

static void oly_proc_leave(Proc p, Frame *save) {
    oly_scall_leave(p->def_level + 1);
    Int n = p->def_level + 1;
    for (Int l = 0; l < n; l++)
        *oly_cell(l) = save[l];
    oly_active_top--;
    if (p->pending_delete && !oly_proc_active(p))
        oly_free_proc(p);
}

#define OLY_CALL_BODY(rettype, entrytype)                        \
    Frame save[OLY_MAX_DISPLAY];                                 \
    (void)env;                                                   \
    Env callee = oly_proc_enter(proc, argc, args, save);         \
    rettype r = ((entrytype)proc->entry)(callee, NULL);          \
    oly_proc_leave(proc, save);                                  \
    return r

Int call_proc_int(Proc proc, Env env, Int argc, OlySlotBits *args) {
    OLY_CALL_BODY(Int, OlyEntryInt);
}

Real call_proc_real(Proc proc, Env env, Int argc, OlySlotBits *args) {
    OLY_CALL_BODY(Real, OlyEntryReal);
}

Vector call_proc_vector(Proc proc, Env env, Int argc, OlySlotBits *args) {
    OLY_CALL_BODY(Vector, OlyEntryVector);
}

Complex call_proc_complex(Proc proc, Env env, Int argc, OlySlotBits *args) {
    OLY_CALL_BODY(Complex, OlyEntryComplex);
}

Proc call_proc_proc(Proc proc, Env env, Int argc, OlySlotBits *args) {
    OLY_CALL_BODY(Proc, OlyEntryProc);
}

void call_proc_void(Proc proc, Env env, Int argc, OlySlotBits *args) {
    Frame save[OLY_MAX_DISPLAY];
    (void)env;
    Env callee = oly_proc_enter(proc, argc, args, save);
    ((OlyEntryVoid)proc->entry)(callee, NULL);
    oly_proc_leave(proc, save);
}

/* ---- allocation ---------------------------------------------------------------- */

Vector oly_alloc_vector(Int length) {
    if (length < 0)
        length = 0;
    Vector v = oly_heap_alloc((Int)sizeof(Int) +
                              length * (Int)sizeof(OlySlotBits));
    v->length = length;
    if (length)
        memset(v->data, 0, (size_t)length * sizeof(OlySlotBits));
    return v;
}

Vector oly_alloc_vector_fill(Int length, OlySlotBits fill) {
    Vector v = oly_alloc_vector(length);
    for (Int i = 0; i < length; i++)
        v->data[i] = fill;
    return v;
}

Complex oly_alloc_complex(Real re, Real im) {
    Complex c = oly_heap_alloc(sizeof(struct OlyComplexCell));
    c->re = re;
    c->im = im;
    return c;
}

/* ---- lifecycle ------------------------------------------------------------------ */

static const OlyApi oly_api_table = {
    call_proc_int,     call_proc_real, call_proc_vector, call_proc_complex,
    call_proc_proc,    call_proc_void, load_proc,        declare_proc,
    delete_proc,       oly_alloc_vector, oly_alloc_vector_fill,
    oly_alloc_complex, oly_print_int,  oly_print_real,   oly_print_str,
    oly_print_nl,
};

Env oly_rt_init(Int max_lex_levels, Int module_slots, Int need_exec) {
    if (max_lex_levels < 1 || max_lex_levels > OLY_MAX_DISPLAY)
        oly_fatal("display depth out of range");
    oly_max_lex = max_lex_levels;
    const char *wire = getenv("OLY_WIRE");
    oly_wire = wire && wire[0] == '1';
    const char *mt = getenv("OLY_MARK_TIMES");
    oly_mark_times = mt && mt[0] == '1';
    oly_load_dir = getenv("OLY_LOAD_DIR");
    Int heap_bytes = OLY_DEFAULT_HEAP;
    const char *hb = getenv("OLY_HEAP_BYTES");
    if (hb)
        heap_bytes = strtoll(hb, NULL, 10);
    oly_heap_init(heap_bytes, need_exec);
    Int arena_bytes = OLY_DEFAULT_ARENA;
    const char *ab = getenv("OLY_ARENA_BYTES");
    if (ab)
        arena_bytes = strtoll(ab, NULL, 10);
    oly_arena = mmap(NULL, (size_t)arena_bytes, PROT_READ | PROT_WRITE,
                     MAP_PRIVATE | MAP_ANONYMOUS, -1, 0);
    if (oly_arena == MAP_FAILED)
        oly_fatal("frame arena map failed");
    oly_arena_size = (size_t)arena_bytes;
    oly_arena_used = 0;
    for (Int i = 0; i <= oly_max_lex; i++)
        oly_display[i] = NULL;
    oly_display[oly_max_lex] = (Frame)&oly_api_table;
    return oly_scall_enter(0, module_slots, 1);
}

void oly_exit(Int status) {
    if (oly_wire) {
        uint8_t payload[4];
        oly_put_u32(payload, (uint32_t)(int32_t)status);
        oly_wire_send(0x03, payload, 4);
    }
    exit((int)status);
}
