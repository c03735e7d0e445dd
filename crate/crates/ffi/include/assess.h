#ifndef ASSESS_H
#define ASSESS_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Buffer size for a tracking code: five digits and a terminating NUL.
 */
#define ASSESS_TRACKING_CODE_LEN 6

typedef enum AssessDirection {
  ASSESS_DIRECTION_UP = 0,
  ASSESS_DIRECTION_DOWN = 1,
  ASSESS_DIRECTION_LEFT = 2,
  ASSESS_DIRECTION_RIGHT = 3,
} AssessDirection;

typedef enum AssessGame {
  ASSESS_GAME_GROUP_SWAP = 0,
  ASSESS_GAME_SLIDING_PATH = 1,
  ASSESS_GAME_MEMORY = 2,
  ASSESS_GAME_SHOOTER = 3,
  ASSESS_GAME_GRAPH = 4,
  ASSESS_GAME_META = 5,
} AssessGame;

typedef enum AssessStageStatus {
  ASSESS_STAGE_STATUS_PLAYING = 0,
  ASSESS_STAGE_STATUS_WON = 1,
  ASSESS_STAGE_STATUS_TIME_EXPIRED = 2,
  ASSESS_STAGE_STATUS_OUT_OF_MOVES = 3,
  ASSESS_STAGE_STATUS_STUCK = 4,
  ASSESS_STAGE_STATUS_DEAD = 5,
  ASSESS_STAGE_STATUS_SURRENDERED = 6,
  ASSESS_STAGE_STATUS_SKIPPED = 7,
} AssessStageStatus;

typedef enum AssessStatus {
  ASSESS_STATUS_OK = 0,
  ASSESS_STATUS_NULL_POINTER = 1,
  ASSESS_STATUS_INVALID_UTF8 = 2,
  ASSESS_STATUS_NOT_FOUND = 3,
  ASSESS_STATUS_PARSE = 4,
  ASSESS_STATUS_IO = 5,
  ASSESS_STATUS_NOT_PLAYING = 6,
  ASSESS_STATUS_SOLVER = 7,
  ASSESS_STATUS_VALIDATION = 8,
  ASSESS_STATUS_BUFFER_TOO_SMALL = 9,
  ASSESS_STATUS_PANIC = 10,
} AssessStatus;

/**
 * Opaque graph-traversal stage in progress.
 */
typedef struct AssessGraph AssessGraph;

/**
 * Opaque group-swap stage in progress.
 */
typedef struct AssessGroupSwap AssessGroupSwap;

/**
 * Opaque level pack.
 */
typedef struct AssessLevels AssessLevels;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *assess_version(void);

/**
 * Message for the last failed call on this thread, or NULL. Valid until the
 * next failing call on the same thread.
 */
const char *assess_last_error(void);

/**
 * Frees a string returned by this library. NULL is ignored.
 */
void assess_string_free(char *s);

/**
 * The level pack shipped with the library.
 */
enum AssessStatus assess_levels_default(struct AssessLevels **out);

/**
 * Loads a pack from a directory of level documents.
 */
enum AssessStatus assess_levels_load_dir(const char *path, struct AssessLevels **out);

void assess_levels_free(struct AssessLevels *levels);

/**
 * Number of levels for `game`.
 */
enum AssessStatus assess_levels_count(const struct AssessLevels *levels,
                                      enum AssessGame game,
                                      size_t *out);

/**
 * JSON slice of the pack for one game, as served to clients. Free the
 * result with `assess_string_free`.
 */
enum AssessStatus assess_levels_slice_json(const struct AssessLevels *levels,
                                           enum AssessGame game,
                                           char **out);

/**
 * Solves every puzzle level and checks move limits. Writes the number of
 * failing levels; returns `Validation` naming the first when any fail.
 */
enum AssessStatus assess_levels_validate(const struct AssessLevels *levels,
                                         size_t state_cap,
                                         size_t *failed);

/**
 * Starts group-swap level `index`.
 */
enum AssessStatus assess_groupswap_new(const struct AssessLevels *levels,
                                       size_t index,
                                       struct AssessGroupSwap **out);

void assess_groupswap_free(struct AssessGroupSwap *game);

/**
 * Moves `piece` one cell to (`row`, `col`). A rule violation is not an
 * error: `accepted` is set to false and the state is unchanged.
 */
enum AssessStatus assess_groupswap_move(struct AssessGroupSwap *game,
                                        uint8_t piece,
                                        uint8_t row,
                                        uint8_t col,
                                        bool *accepted);

enum AssessStatus assess_groupswap_status(const struct AssessGroupSwap *game,
                                          enum AssessStageStatus *out);

enum AssessStatus assess_groupswap_moves_used(const struct AssessGroupSwap *game, uint32_t *out);

/**
 * Resets pieces and the move count. Fails once the stage is won or
 * abandoned.
 */
enum AssessStatus assess_groupswap_restart(struct AssessGroupSwap *game);

/**
 * Optimal move count for group-swap level `index`, or -1 if unsolvable.
 */
enum AssessStatus assess_groupswap_solve(const struct AssessLevels *levels,
                                         size_t index,
                                         size_t state_cap,
                                         int64_t *out);

/**
 * Starts graph-traversal level `index`.
 */
enum AssessStatus assess_graph_new(const struct AssessLevels *levels,
                                   size_t index,
                                   struct AssessGraph **out);

void assess_graph_free(struct AssessGraph *game);

/**
 * Slides in `dir`. `accepted` is false when no new node would be reached.
 */
enum AssessStatus assess_graph_step(struct AssessGraph *game,
                                    enum AssessDirection dir,
                                    bool *accepted);

enum AssessStatus assess_graph_status(const struct AssessGraph *game, enum AssessStageStatus *out);

enum AssessStatus assess_graph_moves_used(const struct AssessGraph *game, uint32_t *out);

enum AssessStatus assess_graph_restart(struct AssessGraph *game);

/**
 * Fewest slides visiting every node of graph level `index`, or -1.
 */
enum AssessStatus assess_graph_solve(const struct AssessLevels *levels,
                                     size_t index,
                                     size_t state_cap,
                                     int64_t *out);

/**
 * Tracking code for a JSON array of events. `out` must hold at least
 * `ASSESS_TRACKING_CODE_LEN` bytes and receives a NUL-terminated string.
 */
enum AssessStatus assess_tracking_code(const char *events_json, char *out, size_t out_len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ASSESS_H */
