// Popups: the drop dialog (which directive, which mode, which scope) and the
// rule/argument choice dialog for the choice and debug lookups.

import { ChoicePromptInfo } from "./api";
import { NodeAddress } from "./tree";

export interface GestureDecision {
    directive: "produce" | "map";
    mode: "auto" | "choice" | "debug";
    scope: string;
}

function overlay(): HTMLElement {
    const element = document.createElement("div");
    element.className = "overlay";
    return element;
}

export class DirectiveDialog {
    // scopeOptions: declaration paths from the drop target up to the model root
    show(source: NodeAddress, target: NodeAddress, scopeOptions: string[]): Promise<GestureDecision | null> {
        return new Promise((resolve) => {
            const box = overlay();
            box.innerHTML = `
              <div class="dialog" data-dialog="directive">
                <h3>Migrate ${source.label} into ${target.label}?</h3>
                <label><input type="radio" name="directive" value="produce" checked> produce</label>
                <label><input type="radio" name="directive" value="map"> map</label>
                <label>mode
                  <select name="mode">
                    <option value="auto" selected>automatic</option>
                    <option value="choice">multiple choice</option>
                    <option value="debug">debug</option>
                  </select>
                </label>
                <label>scope <select name="scope"></select></label>
                <div class="buttons">
                  <button data-action="ok">Apply</button>
                  <button data-action="cancel">Cancel</button>
                </div>
              </div>`;
            const scopeSelect = box.querySelector<HTMLSelectElement>("select[name=scope]")!;
            for (const option of scopeOptions) {
                const element = document.createElement("option");
                element.value = option;
                element.textContent = option;
                scopeSelect.appendChild(element);
            }
            const done = (value: GestureDecision | null) => {
                box.remove();
                resolve(value);
            };
            box.querySelector<HTMLButtonElement>("[data-action=ok]")!.onclick = () => {
                const directive = box.querySelector<HTMLInputElement>(
                    "input[name=directive]:checked",
                )!.value as GestureDecision["directive"];
                const mode = box.querySelector<HTMLSelectElement>("select[name=mode]")!
                    .value as GestureDecision["mode"];
                done({ directive, mode, scope: scopeSelect.value });
            };
            box.querySelector<HTMLButtonElement>("[data-action=cancel]")!.onclick = () => done(null);
            document.body.appendChild(box);
        });
    }
}

export class ChoiceDialog {
    show(prompt: ChoicePromptInfo): Promise<number | null> {
        return new Promise((resolve) => {
            const box = overlay();
            const dialog = document.createElement("div");
            dialog.className = "dialog";
            dialog.dataset.dialog = "choice";
            const heading = document.createElement("h3");
            heading.textContent = prompt.kind === "rule"
                ? `Choose the rule for ${prompt.subject}`
                : `Choose the ${prompt.subject}`;
            dialog.appendChild(heading);
            const list = document.createElement("div");
            list.className = "choice-list";
            const done = (value: number | null) => {
                box.remove();
                resolve(value);
            };
            prompt.options.forEach((option, index) => {
                const button = document.createElement("button");
                button.className = "choice-option";
                button.dataset.index = String(index);
                button.textContent = option;
                button.onclick = () => done(index);
                list.appendChild(button);
            });
            dialog.appendChild(list);
            const cancel = document.createElement("button");
            cancel.dataset.action = "cancel";
            cancel.textContent = "Cancel";
            cancel.onclick = () => done(null);
            dialog.appendChild(cancel);
            box.appendChild(dialog);
            document.body.appendChild(box);
        });
    }
}
