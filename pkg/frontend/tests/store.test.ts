import { describe, expect, it } from "vitest";
import { ApiClient } from "../src/client.js";
import { SessionStore } from "../src/store.js";
import { FakeFetch, loadFixture } from "./helpers.js";

const fx = loadFixture();

function makeStore(): { store: SessionStore; fake: FakeFetch } {
  const fake = new FakeFetch();
  const store = new SessionStore(new ApiClient("", fake.fetch));
  return { store, fake };
}

function answerText(words: string[]): string {
  return words.join(" ");
}

describe("full session replay", () => {
  it("walks the recorded five-step session to completion", async () => {
    const { store, fake } = makeStore();
    fake.expectJson(fx.create.status, fx.create.body);
    for (const step of fx.steps) fake.expectJson(step.status, step.body);

    await store.start("alirt", "both", 5);
    expect(store.getView().phase).toBe("asking");
    expect(store.getView().sessionId).toBe(fx.session_id);
    expect(store.getView().question).toEqual(fx.create.body.question);

    for (const step of fx.steps) {
      await store.submit(answerText(step.request.words));
      const view = store.getView();
      expect(view.step).toBe(step.body.step);
      // displayed numbers are the service's numbers, bit for bit
      expect(view.estimates).toEqual(step.body.estimates);
      expect(view.question).toEqual(step.body.question);
      expect(view.done).toBe(step.body.done);
    }

    const view = store.getView();
    expect(view.phase).toBe("done");
    expect(view.step).toBe(fx.steps.length);
    expect(view.trajectory).toHaveLength(fx.steps.length);
    expect(view.estimates.theta).toBe(fx.snapshots.done.estimates.theta);
    expect(view.estimates.yhat).toBe(fx.snapshots.done.estimates.yhat);

    // one create plus one request per answer, each body as recorded
    expect(fake.calls).toHaveLength(1 + fx.steps.length);
    fx.steps.forEach((step, i) => {
      expect(fake.calls[i + 1]?.body).toEqual(step.request);
    });
    expect(fake.unconsumed).toBe(0);
  });

  it("filters the trajectory to what each step actually reported", async () => {
    const { store, fake } = makeStore();
    fake.expectJson(fx.create.status, fx.create.body);
    const first = fx.steps[0]!;
    fake.expectJson(first.status, first.body);

    await store.start("alirt");
    await store.submit(answerText(first.request.words));

    expect(store.getView().trajectory).toEqual([
      {
        step: first.body.step,
        item_id: first.request.item_id,
        ...first.body.estimates,
      },
    ]);
  });
});

describe("word-minimum gate", () => {
  it("refuses to send an under-length answer", async () => {
    const { store, fake } = makeStore();
    fake.expectJson(fx.create.status, fx.create.body);
    await store.start("alirt");
    const requestsBefore = fake.calls.length;

    await store.submit("sad low"); // the recorded first question wants 5 words

    const view = store.getView();
    expect(fake.calls).toHaveLength(requestsBefore); // nothing left the browser
    expect(view.error?.code).toBe("too_few_words");
    expect(view.error?.message).toContain("at least 5");
    expect(view.phase).toBe("asking");
    expect(view.step).toBe(0);
    expect(view.trajectory).toHaveLength(0);
  });

  it("counts words the way the service will (edge punctuation ignored)", async () => {
    const { store, fake } = makeStore();
    fake.expectJson(fx.create.status, fx.create.body);
    await store.start("alirt");

    expect(store.wordsMissing("sad, tired... low (numb) empty")).toBe(0);
    expect(store.wordsMissing("sad tired ?!")).toBe(3);
    expect(store.wordsMissing("")).toBe(5);
    expect(fake.calls).toHaveLength(1); // counting never touches the network
  });
});

describe("unrecognized words", () => {
  it("keeps the question pending on a rejection and recovers on retry", async () => {
    const { store, fake } = makeStore();
    fake.expectJson(fx.create.status, fx.create.body);
    fake.expectJson(fx.oov.status, fx.oov.body);
    const step = fx.steps[0]!;
    fake.expectJson(step.status, step.body);

    await store.start("alirt");
    await store.submit("qqqq zzzz qqqq zzzz qqqq"); // long enough, all unknown

    let view = store.getView();
    expect(view.error?.code).toBe("all_words_oov");
    expect(view.phase).toBe("asking");
    expect(view.step).toBe(0);
    expect(view.question).toEqual(fx.create.body.question); // asked again
    expect(view.trajectory).toHaveLength(0);

    await store.submit(answerText(step.request.words));
    view = store.getView();
    expect(view.error).toBeNull();
    expect(view.step).toBe(1);
    expect(view.estimates).toEqual(step.body.estimates);
  });
});

describe("refresh recovery", () => {
  it("rebuilds mid-session state from the snapshot and finishes", async () => {
    const { store, fake } = makeStore();
    const snap = fx.snapshots.after_step_2;
    fake.expectJson(200, snap);

    await store.restore(fx.session_id);

    let view = store.getView();
    expect(view.phase).toBe("asking");
    expect(view.step).toBe(snap.step);
    expect(view.trajectory).toEqual(snap.trajectory);
    expect(view.estimates).toEqual(snap.estimates);
    expect(view.question).toEqual(snap.question);
    expect(view.strategy).toBe(snap.strategy);

    for (const step of fx.steps.slice(snap.step)) {
      fake.expectJson(step.status, step.body);
      await store.submit(answerText(step.request.words));
    }
    view = store.getView();
    expect(view.phase).toBe("done");
    expect(view.step).toBe(fx.steps.length);
    expect(view.estimates).toEqual(fx.snapshots.done.estimates);
    expect(view.trajectory).toHaveLength(fx.steps.length);
  });

  it("reports a missing session and returns to idle", async () => {
    const { store, fake } = makeStore();
    fake.expectJson(404, { code: "session_not_found", message: "no such session" });

    await store.restore("0000");

    const view = store.getView();
    expect(view.phase).toBe("idle");
    expect(view.sessionId).toBeNull();
    expect(view.error?.code).toBe("session_not_found");
  });
});

describe("request serialization", () => {
  it("permits one in-flight submission at a time", async () => {
    const { store, fake } = makeStore();
    fake.expectJson(fx.create.status, fx.create.body);
    await store.start("alirt");

    const release = fake.expectPending();
    const step = fx.steps[0]!;
    const first = store.submit(answerText(step.request.words));
    const second = store.submit(answerText(step.request.words)); // must be dropped
    await second;

    expect(fake.calls).toHaveLength(2); // create + a single submission
    expect(store.getView().phase).toBe("submitting");

    release(step.status, step.body);
    await first;
    expect(store.getView().step).toBe(1);
    expect(fake.calls).toHaveLength(2);
  });
});

describe("service unavailable", () => {
  it("returns to idle with a retryable banner when the start fails", async () => {
    const { store, fake } = makeStore();
    fake.expectReject(new TypeError("fetch failed"));

    await store.start("alirt");

    const view = store.getView();
    expect(view.phase).toBe("idle");
    expect(view.error?.code).toBe("network_error");
    expect(view.error?.retryable).toBe(true);
  });
});

describe("subscriptions", () => {
  it("notifies on every change and honors unsubscribe", async () => {
    const { store, fake } = makeStore();
    fake.expectJson(fx.create.status, fx.create.body);
    const phases: string[] = [];
    const off = store.subscribe((v) => phases.push(v.phase));

    await store.start("alirt");
    expect(phases).toEqual(["starting", "asking"]);

    off();
    await store.submit("too short");
    expect(phases).toEqual(["starting", "asking"]); // no calls after unsubscribe
  });
});
