"""An OAuth-style authorization flow driven by a central scheduler.

Every protocol step is recorded as a write of the scheduler's ``scheduled``
field, preceded by a method entry in the party that performs it.  Sessions can
fail at authentication, consent, token issue or resource access, in which case
the resource is not sent.
"""

from __future__ import annotations

from .base import Emitter

CLS = "oauth.Scheduler"
BUGS = ("skip_auth",)

PATH = 's == "Service_Requested" ~~> s == "Authorization_Granted" ~~> s == "Protected_Resource_Sent"'

PARTY = {
    "client": ("oauth.Client", "client"),
    "as": ("oauth.AuthorizationServer", "auth-server"),
    "rs": ("oauth.ResourceServer", "resource-server"),
    "ro": ("oauth.ResourceOwner", "owner"),
}

# (state, party, method, failure probability, failure states)
FLOW = [
    ("Service_Requested", "client", "requestService", 0.0, ()),
    ("Redirected_To_Authorization", "client", "redirect", 0.0, ()),
    ("Login_Page_Sent", "as", "sendLoginPage", 0.0, ()),
    ("Credentials_Submitted", "ro", "submitCredentials", 0.08, ("Authentication_Failed",)),
    ("Authenticated", "as", "authenticate", 0.0, ()),
    ("Consent_Requested", "as", "requestConsent", 0.06, ("Consent_Denied",)),
    ("Consent_Given", "ro", "giveConsent", 0.0, ()),
    ("Authorization_Granted", "as", "grantAuthorization", 0.0, ()),
    ("Authorization_Code_Sent", "as", "sendCode", 0.0, ()),
    ("Token_Requested", "client", "requestToken", 0.05, ("Token_Request_Rejected",)),
    ("Access_Token_Issued", "as", "issueToken", 0.0, ()),
    ("Resource_Requested", "client", "requestResource", 0.1, ("Token_Expired", "Resource_Not_Sent")),
    ("Token_Validated", "rs", "validateToken", 0.0, ()),
    ("Protected_Resource_Sent", "rs", "sendResource", 0.0, ()),
]

SKIP_AUTH = ["Service_Requested", "Token_Requested", "Access_Token_Issued", "Resource_Requested",
             "Token_Validated", "Protected_Resource_Sent"]


def spec_text() -> str:
    lines = [
        "# oauth: the scheduler's current protocol step",
        "filter oauth.*",
        f"key s = {CLS}:1.scheduled : str",
        f"path authorization on s = {PATH}",
        f"prop authorized = P[{PATH}]",
    ]
    return "\n".join(lines) + "\n"


def generate(em: Emitter, events: int, bug):
    rng = em.rng
    owner = {st: party for st, party, *_ in FLOW}
    owner.update({"Authentication_Failed": "as", "Consent_Denied": "ro", "Token_Request_Rejected": "as",
                  "Token_Expired": "rs", "Resource_Not_Sent": "rs", "Session_Closed": "client",
                  "Client_Registered": "client"})

    def step(state, method=None):
        cls, thread = PARTY[owner[state]]
        if method:
            em.enter(thread, f"{cls}.{method}")
        em.write(thread, CLS, "scheduled", state, instance=1)

    step("Client_Registered", "register")
    fired = bug is None
    while em.writes + 10 < events:
        if not fired and em.writes >= events // 2:
            for st in SKIP_AUTH:
                step(st)
            step("Session_Closed", "close")
            fired = True
            continue
        for st, _party, method, p_fail, fail in FLOW:
            step(st, method)
            if p_fail and rng.random() < p_fail:
                for f in fail:
                    step(f)
                break
        else:
            # the client may reuse its token for more resources
            while rng.random() < 0.3:
                step("Resource_Requested", "requestResource")
                step("Token_Validated", "validateToken")
                step("Protected_Resource_Sent", "sendResource")
        step("Session_Closed", "close")
