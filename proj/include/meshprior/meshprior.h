// Copyright 2026 The meshprior Authors
// SPDX-License-Identifier: Apache-2.0

/* C interface of the meshprior library: self-supervised mesh inpainting.
 *
 * Conventions:
 *  - Every fallible call returns an mp_status. On failure a message is
 *    available from mp_last_error() on the calling thread until its next
 *    failing call.
 *  - Objects are opaque handles created by *_create or *_load and released by
 *    the matching *_free; passing NULL to a free function is a no-op.
 *  - Vertex arrays are row-major xyz doubles, face arrays row-major int32
 *    vertex triples. Hole masks hold one byte per vertex, 1 = known and
 *    0 = hole.
 *  - Strings are copied out with (buffer, capacity, needed): `needed`
 *    receives the length including the terminating NUL, and the call fails
 *    with MP_ERR_ARGUMENT if `capacity` is too small. A NULL buffer with a
 *    non-NULL `needed` only queries the size. */

#ifndef MESHPRIOR_MESHPRIOR_H_
#define MESHPRIOR_MESHPRIOR_H_

#include <stddef.h>
#include <stdint.h>

#if defined(MESHPRIOR_BUILDING_LIBRARY)
#define MP_API __attribute__((visibility("default")))
#else
#define MP_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mp_status {
  MP_OK = 0,
  MP_ERR_IO = 1,
  MP_ERR_FORMAT = 2,
  MP_ERR_DATA = 3,
  MP_ERR_STRUCTURE = 4,
  MP_ERR_DEGENERATE = 5,
  MP_ERR_NUMERIC = 6,
  MP_ERR_STATE = 7,
  MP_ERR_CONFIG = 8,
  MP_ERR_ARGUMENT = 9,
  MP_ERR_SIMPLIFICATION = 10,
  MP_ERR_UNDEFINED_LOSS = 11,
  MP_ERR_CANCELLED = 12,
  MP_ERR_INTERNAL = 13
} mp_status;

typedef enum mp_arch { MP_ARCH_SGCN = 0, MP_ARCH_MGCN = 1 } mp_arch;

typedef enum mp_mesh_kind {
  MP_MESH_INPUT = 0,
  MP_MESH_GROUND_TRUTH = 1,
  MP_MESH_INIT = 2,      /* watertight, remeshed */
  MP_MESH_SMOOTH = 3,    /* oversmoothed M_init */
  MP_MESH_COMPLETED = 4, /* network output */
  MP_MESH_OUTPUT = 5     /* after refinement */
} mp_mesh_kind;

typedef struct mp_mesh mp_mesh;
typedef struct mp_config mp_config;
typedef struct mp_session mp_session;

MP_API const char* mp_version(void);
MP_API const char* mp_status_name(mp_status status);
MP_API const char* mp_last_error(void);

/* Meshes */

/* OBJ or PLY, chosen by extension. */
MP_API mp_status mp_mesh_load(const char* path, mp_mesh** out);
MP_API mp_status mp_mesh_create(const double* vertices, size_t num_vertices, const int32_t* faces, size_t num_faces,
                                mp_mesh** out);
/* Format by extension (.obj or .ply). `scalars` (one per vertex, may be
 * NULL) become blue-white-red PLY vertex colours. */
MP_API mp_status mp_mesh_save(const mp_mesh* mesh, const char* path, const double* scalars);
MP_API size_t mp_mesh_num_vertices(const mp_mesh* mesh);
MP_API size_t mp_mesh_num_faces(const mp_mesh* mesh);
/* `out` holds 3 * num_vertices doubles / 3 * num_faces ints. */
MP_API mp_status mp_mesh_copy_vertices(const mp_mesh* mesh, double* out);
MP_API mp_status mp_mesh_copy_faces(const mp_mesh* mesh, int32_t* out);
/* Number of boundary loops (0 for a watertight mesh). */
MP_API mp_status mp_mesh_boundary_loops(const mp_mesh* mesh, size_t* count);
MP_API void mp_mesh_free(mp_mesh* mesh);

/* Built-in test meshes; see mp_fixture_names. Either output may be NULL. */
MP_API mp_status mp_fixture(const char* name, mp_mesh** damaged, mp_mesh** ground_truth);
/* Comma-separated list of fixture names. */
MP_API mp_status mp_fixture_names(char* buffer, size_t capacity, size_t* needed);

/* Configuration: INI text with [run], [remesh], [smooth], [augment],
 * [train], [bnf], [refine] and [metrics] sections. Keys are addressed as
 * "section.key". */

MP_API mp_status mp_config_create(mp_config** out);
MP_API mp_status mp_config_load(const char* path, mp_config** out);
MP_API mp_status mp_config_parse(const char* text, mp_config** out);
MP_API mp_status mp_config_set(mp_config* config, const char* key, const char* value);
MP_API mp_status mp_config_get(const mp_config* config, const char* key, char* buffer, size_t capacity,
                               size_t* needed);
MP_API mp_status mp_config_validate(const mp_config* config);
/* Every key with its effective value; parsing it back gives the same
 * configuration. */
MP_API mp_status mp_config_to_string(const mp_config* config, char* buffer, size_t capacity, size_t* needed);
MP_API mp_status mp_config_write(const mp_config* config, const char* path);
MP_API void mp_config_free(mp_config* config);

/* Sessions */

typedef struct mp_loss_record {
  int32_t step;
  double lr;
  int32_t levels;     /* entries in `pos` */
  const double* pos;  /* valid during the callback only */
  double nrm;
  double reg;
  double total;
} mp_loss_record;

/* Return nonzero to stop training; mp_session_train then returns
 * MP_ERR_CANCELLED with the completed steps kept. */
typedef int (*mp_step_callback)(const mp_loss_record* record, void* user_data);

typedef struct mp_preprocess_summary {
  int32_t input_vertices;
  int32_t input_faces;
  int32_t hole_loops;
  int32_t vertices; /* of M_init */
  int32_t faces;
  int32_t hole_vertices;
  double masked_fraction;
  double target_edge_length;
} mp_preprocess_summary;

typedef struct mp_refine_report {
  double relative_residual;
  int32_t iterations;
  int32_t hbar_size;
} mp_refine_report;

typedef struct mp_metrics {
  double eps_all; /* x 1e-3 of the ground-truth bbox diagonal */
  int32_t has_eps_hole;
  double eps_hole;
  double eps_all_vertex; /* nearest-vertex variant, if requested */
  int32_t has_eps_hole_vertex;
  double eps_hole_vertex;
  int32_t hole_vertices;
} mp_metrics;

/* The session keeps its own copy of `config`. */
MP_API mp_status mp_session_create(const mp_config* config, mp_session** out);
/* Reads run.input and run.ground_truth ("fixture:NAME" selects a built-in). */
MP_API mp_status mp_session_load_inputs(mp_session* session);
MP_API mp_status mp_session_set_input(mp_session* session, const mp_mesh* mesh);
MP_API mp_status mp_session_set_ground_truth(mp_session* session, const mp_mesh* mesh);
MP_API mp_status mp_session_preprocess(mp_session* session, mp_preprocess_summary* summary);
/* Hierarchy, fake-hole mask sets and model initialization. */
MP_API mp_status mp_session_prepare(mp_session* session);
/* Runs the remaining steps up to train.steps. `callback` may be NULL. */
MP_API mp_status mp_session_train(mp_session* session, mp_step_callback callback, void* user_data);
MP_API mp_status mp_session_steps_done(const mp_session* session, int32_t* steps);
MP_API mp_status mp_session_evaluate(mp_session* session);
MP_API mp_status mp_session_refine(mp_session* session, mp_refine_report* report);
MP_API mp_status mp_session_get_mesh(const mp_session* session, mp_mesh_kind kind, mp_mesh** out);
/* Real-hole mask on M_init; `out` holds mp_mesh_num_vertices(M_init) bytes. */
MP_API mp_status mp_session_real_mask(const mp_session* session, uint8_t* out);
/* Known displacements M_init - M_smooth, 3 doubles per M_init vertex. */
MP_API mp_status mp_session_displacement(const mp_session* session, double* out);
/* Mean masked vertex fraction over the fake-hole mask sets. */
MP_API mp_status mp_session_mask_fraction(const mp_session* session, double* fraction);
/* Metrics of M_init, M_smooth, M_cmp or M_out against the ground truth.
 * `signed_distance` (may be NULL) receives one value per M_init vertex. */
MP_API mp_status mp_session_metrics(const mp_session* session, mp_mesh_kind kind, mp_metrics* metrics,
                                    double* signed_distance);
/* Mean angle (radians) to the ground-truth normals over faces in holes. */
MP_API mp_status mp_session_hole_normal_angle(const mp_session* session, mp_mesh_kind kind, double* radians);
/* CSV: step, lr, E_pos per level, E_nrm, E_reg, total. */
MP_API mp_status mp_session_write_loss_trace(const mp_session* session, const char* path);
MP_API mp_status mp_session_save_checkpoint(const mp_session* session, const char* path);
/* Requires mp_session_prepare; the next mp_session_train resumes. */
MP_API mp_status mp_session_load_checkpoint(mp_session* session, const char* path);
MP_API void mp_session_free(mp_session* session);

/* Standalone operations */

/* Metrics of `output` against `ground_truth`; `hole_mask` (one byte per
 * output vertex) may be NULL. */
MP_API mp_status mp_metrics_compute(const mp_mesh* output, const mp_mesh* ground_truth, const uint8_t* hole_mask,
                                    int nearest_vertex, mp_metrics* metrics, double* signed_distance);

/* Refines `completed` (3 doubles per vertex of `init`) towards a mesh that
 * keeps `init` outside the holes. `out` receives 3 doubles per vertex. */
MP_API mp_status mp_refine(const mp_mesh* init, const double* completed, const uint8_t* mask, double mu,
                           double* out, mp_refine_report* report);
/* Refinement weight for a mesh type name ("cad", "noncad", "realscan") and
 * optional mesh name (may be NULL). */
MP_API mp_status mp_default_mu(const char* type, const char* mesh_name, double* mu);

typedef struct mp_gradcheck_options {
  mp_arch arch;
  int32_t width;
  double h;
  double tolerance;
  double abs_floor;
  uint64_t seed;
  int32_t warmup_steps;
  int32_t freeze_activations;
  const char* corrupt_parameter; /* NULL or "" for none */
} mp_gradcheck_options;

typedef struct mp_gradcheck_report {
  int32_t passed;
  double max_rel_error;
  char worst_parameter[128];
  int32_t worst_entry;
  double analytic;
  double numeric;
  int64_t checked;
  int32_t parameters;
  double seconds;
} mp_gradcheck_report;

MP_API void mp_gradcheck_default_options(mp_gradcheck_options* options);
/* Returns MP_OK whenever the check ran; see report->passed. */
MP_API mp_status mp_gradcheck(const mp_gradcheck_options* options, mp_gradcheck_report* report);

#ifdef __cplusplus
}
#endif

#endif /* MESHPRIOR_MESHPRIOR_H_ */
