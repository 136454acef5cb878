/* C interface to the cellcut segmentation library.
 *
 * All functions returning cellcut_status set a thread-local message
 * retrievable through cellcut_last_error() on failure. Objects are opaque;
 * every *_destroy accepts NULL. Strings and buffers returned through out
 * parameters are owned by the caller and released with cellcut_string_free /
 * cellcut_buffer_free; pointers documented as borrowed stay valid until their
 * owning object is destroyed.
 */
#ifndef CELLCUT_H
#define CELLCUT_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum cellcut_status {
    CELLCUT_OK = 0,
    CELLCUT_ERR_INVALID_ARGUMENT = 1,
    CELLCUT_ERR_PRECONDITION = 2,
    CELLCUT_ERR_IO = 3,
    CELLCUT_ERR_FORMAT = 4,
    CELLCUT_ERR_INTERNAL = 5
} cellcut_status;

typedef struct cellcut_config cellcut_config;
typedef struct cellcut_image cellcut_image;
typedef struct cellcut_labelmap cellcut_labelmap;
typedef struct cellcut_model cellcut_model;
typedef struct cellcut_segmentation cellcut_segmentation;

const char* cellcut_version(void);
/* Message for the most recent failure on this thread ("" after success). */
const char* cellcut_last_error(void);

void cellcut_string_free(char* s);
void cellcut_buffer_free(void* p);

/* ---- configuration ------------------------------------------------------ */

cellcut_config* cellcut_config_create(void); /* defaults; NULL on allocation failure */
void cellcut_config_destroy(cellcut_config* cfg);
cellcut_status cellcut_config_load(const char* path, cellcut_config** out);
cellcut_status cellcut_config_save(const cellcut_config* cfg, const char* path);
cellcut_status cellcut_config_set(cellcut_config* cfg, const char* key, const char* value);
cellcut_status cellcut_config_get(const cellcut_config* cfg, const char* key,
                                  char* buf, size_t bufsize);
cellcut_status cellcut_config_validate(const cellcut_config* cfg);
cellcut_status cellcut_config_dump(const cellcut_config* cfg, char** out);

/* ---- images (grayscale, float [0,1]) ------------------------------------ */

cellcut_status cellcut_image_load(const char* path, cellcut_image** out);
/* bit_depth 8 or 16; format chosen by extension (.png/.pgm) */
cellcut_status cellcut_image_save(const cellcut_image* img, const char* path, int bit_depth);
cellcut_status cellcut_image_from_data(int width, int height, const float* data,
                                       cellcut_image** out);
void cellcut_image_destroy(cellcut_image* img);
int cellcut_image_width(const cellcut_image* img);
int cellcut_image_height(const cellcut_image* img);
const float* cellcut_image_data(const cellcut_image* img); /* borrowed, row-major */

/* ---- label maps (16-bit grayscale PNG on disk) -------------------------- */

cellcut_status cellcut_labelmap_load(const char* path, cellcut_labelmap** out);
cellcut_status cellcut_labelmap_save(const cellcut_labelmap* map, const char* path);
cellcut_status cellcut_labelmap_from_data(int width, int height, const uint32_t* data,
                                          cellcut_labelmap** out);
void cellcut_labelmap_destroy(cellcut_labelmap* map);
int cellcut_labelmap_width(const cellcut_labelmap* map);
int cellcut_labelmap_height(const cellcut_labelmap* map);
uint32_t cellcut_labelmap_max(const cellcut_labelmap* map);
const uint32_t* cellcut_labelmap_data(const cellcut_labelmap* map); /* borrowed */

/* ---- synthetic scenes --------------------------------------------------- */

/* Uses the scene_* keys of the config; rng_seed chosen per scene. */
cellcut_status cellcut_synth_scene(const cellcut_config* cfg, uint64_t rng_seed,
                                   cellcut_image** image, cellcut_labelmap** truth);

/* ---- training & models -------------------------------------------------- */

/* class_counts (nullable) receives drawn base samples per class
 * (interior, border, exterior). */
cellcut_status cellcut_train(const cellcut_config* cfg, const cellcut_image* const* images,
                             const cellcut_labelmap* const* annotations, size_t count,
                             uint64_t class_counts[3], cellcut_model** out);
cellcut_status cellcut_cross_validate(const cellcut_config* cfg,
                                      const cellcut_image* const* images,
                                      const cellcut_labelmap* const* annotations, size_t count,
                                      int folds, double* mean_accuracy, double* std_accuracy);

cellcut_status cellcut_model_save(const cellcut_model* model, const char* path);
cellcut_status cellcut_model_load(const char* path, cellcut_model** out);
void cellcut_model_destroy(cellcut_model* model);
cellcut_status cellcut_model_info(const cellcut_model* model, int* num_ferns,
                                  int* tests_per_fern, int* window_radius);
/* Mean per-fern Shannon entropy (bits) of the outcome distribution, per class. */
cellcut_status cellcut_model_class_entropy(const cellcut_model* model, double entropy[3]);

/* ---- segmentation ------------------------------------------------------- */

/* seed_xy: 2*seed_count ints (x y pairs) overriding automatic extraction;
 * NULL for the standard threshold sweep. */
cellcut_status cellcut_segment(const cellcut_model* model, const cellcut_image* image,
                               const cellcut_config* cfg, const int32_t* seed_xy,
                               size_t seed_count, cellcut_segmentation** out);
void cellcut_segmentation_destroy(cellcut_segmentation* seg);

const cellcut_labelmap* cellcut_segmentation_labels(const cellcut_segmentation* seg);
uint32_t cellcut_segmentation_num_labels(const cellcut_segmentation* seg);
int cellcut_segmentation_converged(const cellcut_segmentation* seg);
size_t cellcut_segmentation_seed_count(const cellcut_segmentation* seg);
cellcut_status cellcut_segmentation_seed(const cellcut_segmentation* seg, size_t index,
                                         int* x, int* y);
/* Per-move energy values (entry 0 = initial labeling); borrowed. */
cellcut_status cellcut_segmentation_trace(const cellcut_segmentation* seg,
                                          const double** values, size_t* count);
cellcut_status cellcut_segmentation_trace_csv(const cellcut_segmentation* seg, char** out);
size_t cellcut_segmentation_sweep_count(const cellcut_segmentation* seg);
cellcut_status cellcut_segmentation_sweep(const cellcut_segmentation* seg, size_t index,
                                          int* sweep, double* energy, uint32_t* labels_in_use);
/* pixel_class: 0 interior, 1 border, 2 exterior; buf holds width*height floats. */
cellcut_status cellcut_segmentation_posterior(const cellcut_segmentation* seg, int pixel_class,
                                              float* buf, size_t bufsize);
/* Writes <prefix>_post_{interior,border,exterior}.f32 dumps. */
cellcut_status cellcut_segmentation_save_posteriors(const cellcut_segmentation* seg,
                                                    const char* prefix);

cellcut_status cellcut_write_overlay(const cellcut_image* image, const cellcut_labelmap* labels,
                                     const char* path);

/* ---- evaluation --------------------------------------------------------- */

/* Any output pointer may be NULL. */
cellcut_status cellcut_metrics(const cellcut_labelmap* predicted, const cellcut_labelmap* truth,
                               double* mean_dice, int* splits, int* merges,
                               uint32_t* n_labels_used);
/* as_json nonzero -> JSON document, else flat key=value text. */
cellcut_status cellcut_metrics_report(const cellcut_labelmap* predicted,
                                      const cellcut_labelmap* truth, int as_json, char** out);

/* ---- misc files --------------------------------------------------------- */

/* "x y" per line, '#' comments; coordinates validated against width/height. */
cellcut_status cellcut_seed_file_load(const char* path, int width, int height,
                                      int32_t** xy_out, size_t* count_out);
/* Summary statistics of a .f32 score dump. */
cellcut_status cellcut_float_grid_stats(const char* path, int* width, int* height,
                                        double* min_value, double* max_value,
                                        double* mean_value);

#ifdef __cplusplus
}
#endif

#endif /* CELLCUT_H */
