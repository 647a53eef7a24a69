#ifndef POKEAI_POKEAI_H
#define POKEAI_POKEAI_H

/*
 * C interface to the pokeai battle engine and evaluation harness.
 *
 * Conventions:
 *  - Every fallible call returns a pokeai_status; POKEAI_OK is zero.
 *  - On failure, pokeai_last_error() returns a message for the calling
 *    thread. The pointer stays valid until the next failing call on that
 *    thread.
 *  - Strings returned through char** out-parameters are heap-allocated and
 *    must be released with pokeai_string_free().
 *  - Structured inputs and outputs are UTF-8 JSON text.
 */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define POKEAI_API __declspec(dllexport)
#else
#define POKEAI_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum pokeai_status {
    POKEAI_OK = 0,
    POKEAI_ERR_INTERNAL = 1,
    POKEAI_ERR_INVALID_ARGUMENT = 2,
    POKEAI_ERR_DATA = 3,
    POKEAI_ERR_IO = 4,
    POKEAI_ERR_ENDPOINT = 5,
    POKEAI_ERR_REPLAY_MISS = 6,
    POKEAI_ERR_INPUT_CLOSED = 7,
    POKEAI_ERR_CONTRACT = 8,
    POKEAI_ERR_DEADLOCK = 9
} pokeai_status;

typedef struct pokeai_data pokeai_data;
typedef struct pokeai_battle pokeai_battle;
typedef struct pokeai_memory pokeai_memory;

POKEAI_API const char* pokeai_version(void);
POKEAI_API const char* pokeai_last_error(void);
POKEAI_API const char* pokeai_status_name(pokeai_status status);
POKEAI_API void pokeai_string_free(char* s);

/* Number of HTTP requests sent to chat endpoints by this process. */
POKEAI_API uint64_t pokeai_live_call_count(void);

/* ---- game data ---------------------------------------------------------- */

POKEAI_API pokeai_status pokeai_data_load(const char* data_dir, pokeai_data** out);
POKEAI_API void pokeai_data_free(pokeai_data* data);

/*
 * Loads the rule set, every encounter table and checkpoint under data_dir,
 * and the prompt template. report receives {"ok": true, "checked": [...]}.
 */
POKEAI_API pokeai_status pokeai_validate_data(const char* data_dir, const char* prompt_path, char** report);

/* ---- single battles ----------------------------------------------------- */

/*
 * Starts a battle between the checkpoint party and a wild Monster of the
 * given species and level (DVs rolled from seed). Wild moves follow the
 * species learnset.
 */
POKEAI_API pokeai_status pokeai_battle_new(const pokeai_data* data, const char* checkpoint_path,
                                           const char* species, int level, uint64_t seed, pokeai_battle** out);
POKEAI_API void pokeai_battle_free(pokeai_battle* battle);
POKEAI_API pokeai_status pokeai_battle_state(const pokeai_battle* battle, char** state_json);
/* mask: "full", "no-escape", "no-switch" or "no-item". Actions use the wire format. */
POKEAI_API pokeai_status pokeai_battle_valid_actions(const pokeai_battle* battle, const char* mask,
                                                     char** actions_json);
/*
 * Plays one turn. action_json uses the wire format
 * {"action": "move"|"switch"|"item"|"run", "index": n}; the wild side picks
 * its own move. events_json receives the turn's events.
 */
POKEAI_API pokeai_status pokeai_battle_step(pokeai_battle* battle, const char* mask, const char* action_json,
                                            char** events_json);
/* 0 ongoing, 1 win, 2 loss, 3 escaped. */
POKEAI_API int pokeai_battle_outcome(const pokeai_battle* battle);

/* ---- memory bank -------------------------------------------------------- */

POKEAI_API pokeai_status pokeai_memory_open(const char* path, pokeai_memory** out);
POKEAI_API void pokeai_memory_free(pokeai_memory* memory);
/* record_json: {"text", "entities": {...}, "outcome": "won"|"lost"|"escaped"}. */
POKEAI_API pokeai_status pokeai_memory_insert(pokeai_memory* memory, const char* record_json, char** id);
/* query_json: the entities object. results_json: [{"record": {...}, "score": x}, ...]. */
POKEAI_API pokeai_status pokeai_memory_retrieve(const pokeai_memory* memory, const char* query_json, int k,
                                                char** results_json);
POKEAI_API pokeai_status pokeai_memory_size(const pokeai_memory* memory, size_t* size);
POKEAI_API pokeai_status pokeai_memory_compact(pokeai_memory* memory, size_t* dropped);

/* ---- experiments -------------------------------------------------------- */

/*
 * config_json mirrors the run configuration file. result_json receives
 * {"run_dir", "metrics", "summary"}.
 */
POKEAI_API pokeai_status pokeai_run_eval(const char* config_json, char** result_json);
/* result_json: {"run_dir", "variants": [{"variant", "metrics"}], "table"}. */
POKEAI_API pokeai_status pokeai_ablate(const char* config_json, char** result_json);
/* config_json: {"data_dir", "prompt", "store_path", "output_dir", "seed"}, all optional. */
POKEAI_API pokeai_status pokeai_pilot_memory(const char* config_json, char** result_json);

/*
 * Console hooks for interactive play. read_line copies one line (without
 * the newline) into buf and returns its length, or -1 at end of input.
 */
typedef long (*pokeai_read_line_fn)(void* user, char* buf, size_t capacity);
typedef void (*pokeai_write_fn)(void* user, const char* text, size_t length);

POKEAI_API pokeai_status pokeai_play(const char* config_json, pokeai_read_line_fn read_line, pokeai_write_fn write,
                                     void* user, char** result_json);

/* Compares two run directories ignoring timestamps and latencies. */
POKEAI_API pokeai_status pokeai_runs_equal(const char* run_dir_a, const char* run_dir_b, int* equal);

#ifdef __cplusplus
}
#endif

#endif /* POKEAI_POKEAI_H */
