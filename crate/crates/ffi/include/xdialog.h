#ifndef XDIALOG_H
#define XDIALOG_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum XdStatus {
  XD_OK = 0,
  XD_NULL_ARGUMENT = 1,
  XD_INVALID_UTF8 = 2,
  XD_PARSE_ERROR = 3,
  XD_ILLEGAL_MOVE = 4,
  XD_TERMINATED = 5,
  XD_ERROR = 6,
} XdStatus;

typedef struct XdProtocol XdProtocol;
typedef struct XdSession XdSession;

/* Protocols. Free with xd_protocol_free. */
XdProtocol *xd_protocol_default(void);
XdProtocol *xd_protocol_load(const char *json);
void xd_protocol_free(XdProtocol *protocol);

/* Writes the verdict JSON to *out_verdict; free it with xd_string_free. */
XdStatus xd_validate_trace(const XdProtocol *protocol, const char *trace_jsonl, char **out_verdict);

/* Sessions. Free with xd_session_free. */
XdSession *xd_session_new(const XdProtocol *protocol);
void xd_session_free(XdSession *session);
XdStatus xd_session_apply(XdSession *session, const char *kind, const char *actor);
char *xd_session_state(const XdSession *session);
int32_t xd_session_is_finished(const XdSession *session);
XdStatus xd_session_legal_moves(const XdSession *session, char **out_json);
char *xd_session_trace(const XdSession *session);

/* Errors are per thread. The code pointer is borrowed; the message is owned. */
const char *xd_last_error_code(void);
char *xd_last_error_message(void);

void xd_string_free(char *s);

#ifdef __cplusplus
}
#endif

#endif
