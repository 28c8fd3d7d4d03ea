import { SessionApi } from "./api.js";
import { App } from "./app.js";
import { renderErrorBanner } from "./render.js";

async function boot(): Promise<void> {
  const mount = document.getElementById("app");
  if (!mount) return;
  const api = new SessionApi("");
  let bugs;
  try {
    bugs = (await api.listBugs()).bugs;
  } catch (err) {
    mount.replaceChildren(renderErrorBanner(`could not reach the service: ${err}`));
    return;
  }
  const picker = document.createElement("div");
  picker.className = "bug-picker";
  const heading = document.createElement("h1");
  heading.textContent = "patchlens — pick a bug";
  picker.appendChild(heading);
  const list = document.createElement("ul");
  for (const bug of bugs) {
    const item = document.createElement("li");
    const link = document.createElement("a");
    link.href = "#";
    link.textContent = `${bug.bug_id} (${bug.root_cause}, ${bug.patch_count} plausible patches)`;
    link.addEventListener("click", (event) => {
      event.preventDefault();
      const app = new App(api, mount);
      void app.start(bug.bug_id);
    });
    item.appendChild(link);
    list.appendChild(item);
  }
  picker.appendChild(list);
  mount.replaceChildren(picker);
}

void boot();
